/** Word-cloud rendering: font size falls with score rank, not raw score,
 * so the three measures' wildly different scales render comparably. */

import { RelatedItem } from './api.js';

export const MIN_FONT_PX = 13;
export const MAX_FONT_PX = 34;

/** Dense ranks over scores already sorted descending: the top score gets
 * rank 0 and equal scores share a rank. */
export function denseRanks(scores: readonly number[]): number[] {
  const ranks: number[] = [];
  let rank = -1;
  let previous = Number.NaN;
  for (const score of scores) {
    if (score !== previous) {
      rank += 1;
      previous = score;
    }
    ranks.push(rank);
  }
  return ranks;
}

/** Monotone map from rank to pixels: rank 0 largest, last rank smallest.
 * A single rank renders at the maximum. */
export function fontSizeFor(rank: number, rankCount: number): number {
  if (rankCount <= 1) return MAX_FONT_PX;
  const t = rank / (rankCount - 1);
  return Math.round(MAX_FONT_PX - t * (MAX_FONT_PX - MIN_FONT_PX));
}

/** Replace `container`'s children with one span per result, in result
 * order, sized by dense score rank.  Pure function of the input list, so
 * the layout is deterministic. */
export function renderWordCloud(
  container: HTMLElement,
  results: readonly RelatedItem[],
): void {
  container.textContent = '';
  const ranks = denseRanks(results.map((r) => r.score));
  const rankCount = ranks.length ? ranks[ranks.length - 1] + 1 : 0;
  results.forEach((item, i) => {
    const span = container.ownerDocument.createElement('span');
    span.className = 'cloud-word';
    span.textContent = item.token;
    span.style.fontSize = `${fontSizeFor(ranks[i], rankCount)}px`;
    span.title = `${item.token}: ${item.score}`;
    span.dataset.score = String(item.score);
    container.appendChild(span);
    container.appendChild(container.ownerDocument.createTextNode(' '));
  });
}
