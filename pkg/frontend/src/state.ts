/** Explorer state machine: current query, measure, per-pane results,
 * navigation history, and latest-wins request sequencing.  No DOM here;
 * the app layer subscribes and renders. */

import { ApiError, Client, Measure, MEASURES, RelatedResponse } from './api.js';

export interface Query {
  category: string;
  token: string;
}

export function sameQuery(a: Query | null, b: Query | null): boolean {
  return !!a && !!b && a.category === b.category && a.token === b.token;
}

/** Unknown-token outcome: the 404 body's message and suggestions. */
export interface NotFound {
  token: string;
  message: string;
  suggestions: string[];
}

type HistoryMode = 'push' | 'pop' | 'none';

export class ExplorerStore {
  query: Query | null = null;
  measure: Measure = 'linear';
  /** Last successful response per target category; a pane that failed on
   * the current query holds null with its message in paneErrors. */
  results: Record<string, RelatedResponse | null> = {};
  paneErrors: Record<string, string | null> = {};
  history: Query[] = [];
  error: string | null = null;
  notFound: NotFound | null = null;

  private seq = 0;
  private listeners: Array<() => void> = [];

  constructor(
    private readonly client: Client,
    public cloudTarget: string = 'text',
    public listTarget: string = 'author',
  ) {}

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async submitQuery(token: string, category: string): Promise<void> {
    const trimmed = token.trim();
    if (!trimmed) return;
    await this.load({ category, token: trimmed }, this.measure, 'push');
  }

  /** Clicking a listed author navigates to it like a typed query. */
  async clickAuthor(token: string): Promise<void> {
    await this.submitQuery(token, this.listTarget);
  }

  async selectMeasure(measure: Measure): Promise<void> {
    if (!MEASURES.includes(measure) || measure === this.measure) return;
    if (!this.query) {
      this.measure = measure;
      this.notify();
      return;
    }
    await this.load(this.query, measure, 'none');
  }

  /** Restore the previous query; pops only once its results are back. */
  async back(): Promise<void> {
    const previous = this.history[this.history.length - 1];
    if (!previous) return;
    await this.load(previous, this.measure, 'pop');
  }

  /** Re-run a query arriving from the URL fragment (no history push). */
  async restore(query: Query, measure: Measure): Promise<void> {
    if (!MEASURES.includes(measure)) measure = this.measure;
    await this.load(query, measure, 'none');
  }

  private async load(
    query: Query,
    measure: Measure,
    mode: HistoryMode,
  ): Promise<void> {
    const mine = ++this.seq;
    const targets = [this.cloudTarget, this.listTarget];
    const settled = await Promise.allSettled(
      targets.map((t) =>
        this.client.related(query.category, query.token, t, measure),
      ),
    );
    // a newer navigation superseded this one while it was in flight
    if (mine !== this.seq) return;

    const failures = settled.filter(
      (s): s is PromiseRejectedResult => s.status === 'rejected',
    );
    if (failures.length === targets.length) {
      const first = failures[0].reason;
      if (first instanceof ApiError && first.status === 404) {
        this.notFound = {
          token: query.token,
          message: first.message,
          suggestions: first.suggestions,
        };
      } else {
        this.error =
          first instanceof Error ? first.message : String(first);
      }
      this.notify();
      return;
    }

    if (mode === 'push') {
      const previous = this.query;
      if (
        previous &&
        !sameQuery(previous, query) &&
        !sameQuery(this.history[this.history.length - 1] ?? null, previous)
      ) {
        this.history.push(previous);
      }
    } else if (mode === 'pop') {
      this.history.pop();
    }

    this.query = query;
    this.measure = measure;
    this.error = null;
    this.notFound = null;
    targets.forEach((target, i) => {
      const outcome = settled[i];
      if (outcome.status === 'fulfilled') {
        this.results[target] = outcome.value;
        this.paneErrors[target] = null;
      } else {
        this.results[target] = null;
        this.paneErrors[target] =
          outcome.reason instanceof Error
            ? outcome.reason.message
            : String(outcome.reason);
      }
    });
    this.notify();
  }
}
