// @vitest-environment node
//
// Drives the real DOM wiring against the live Python service started by
// globalSetup.  Each test gets its own JSDOM window, so navigation state
// and hash listeners never leak between tests.
import { JSDOM } from 'jsdom';
import { beforeAll, describe, expect, inject, it } from 'vitest';
import { Client, Measure, RelatedResponse } from '../src/api.js';
import { AppHandles, formatHash, initApp } from '../src/app.js';

let baseUrl: string;

beforeAll(() => {
  baseUrl = inject('baseUrl');
});

interface App {
  dom: JSDOM;
  handles: AppHandles;
}

async function newApp(hash = ''): Promise<App> {
  const dom = new JSDOM('<!doctype html><html><body></body></html>', {
    url: `http://localhost/${hash}`,
  });
  const client = new Client(baseUrl, (url) => fetch(url));
  const handles = initApp(dom.window as unknown as Window, client);
  await handles.ready;
  return { dom, handles };
}

async function waitFor<T>(
  probe: () => T | null | undefined | false,
  what: string,
  timeoutMs = 15_000,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    let value: T | null | undefined | false = null;
    try {
      value = probe();
    } catch {
      // keep polling; the DOM may not be settled yet
    }
    if (value) return value;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}

async function apiRelated(
  category: string,
  token: string,
  target: string,
  measure: Measure,
): Promise<RelatedResponse> {
  const params = new URLSearchParams({ category, token, target, measure });
  const res = await fetch(`${baseUrl}/api/related?${params}`);
  if (!res.ok) throw new Error(`/api/related returned ${res.status}`);
  return (await res.json()) as RelatedResponse;
}

function listedAuthors(handles: AppHandles): { token: string; score: string }[] {
  return [...handles.authorList.querySelectorAll('li')].map((li) => ({
    token: li.querySelector('button.author')?.textContent ?? '',
    score: li.querySelector('span.score')?.textContent ?? '',
  }));
}

function cloudWords(handles: AppHandles): { token: string; px: number }[] {
  return [...handles.cloudPane.querySelectorAll('span')].map((span) => ({
    token: span.textContent ?? '',
    px: parseInt(span.style.fontSize, 10),
  }));
}

function submit(app: App, token: string, category: string): void {
  app.handles.input.value = token;
  app.handles.categorySelect.value = category;
  app.handles.form.dispatchEvent(
    new app.dom.window.Event('submit', { bubbles: true, cancelable: true }),
  );
}

function radio(app: App, measure: Measure): HTMLInputElement {
  const el = app.handles.root.querySelector(
    `#measure-set input[value="${measure}"]`,
  );
  if (!el) throw new Error(`no ${measure} radio`);
  return el as HTMLInputElement;
}

// the served model is built from the two-topic synthetic corpus, so these
// tokens are guaranteed to exist
const KNOWN_AUTHOR = 'author a a';
const OTHER_AUTHOR = 'author b a';
const KNOWN_WORD = 'topicaworda';

describe('explorer boot', () => {
  it('loads categories, defaults, and an idle form', async () => {
    const app = await newApp();
    const options = [...app.handles.categorySelect.options].map((o) => o.value);
    expect(options).toContain('author');
    expect(options).toContain('text');
    expect(app.handles.categorySelect.value).toBe('author');

    const radios = app.handles.root.querySelectorAll('#measure-set input');
    expect(radios).toHaveLength(3);
    expect(radio(app, 'linear').checked).toBe(true);
    expect(app.handles.backButton.disabled).toBe(true);
    expect(app.handles.authorList.children).toHaveLength(0);
  });

  it('labels each category option with its vocabulary size', async () => {
    const app = await newApp();
    const res = await fetch(`${baseUrl}/api/categories`);
    const info = (await res.json()) as {
      categories: { name: string; size: number }[];
    };
    for (const category of info.categories) {
      const option = [...app.handles.categorySelect.options].find(
        (o) => o.value === category.name,
      );
      expect(option?.textContent).toBe(`${category.name} (${category.size})`);
    }
  });
});

describe('query round trip', () => {
  it('renders both panes in exactly the API order', async () => {
    const app = await newApp();
    submit(app, KNOWN_AUTHOR, 'author');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );

    const wantAuthors = await apiRelated(
      'author',
      KNOWN_AUTHOR,
      'author',
      'linear',
    );
    const wantWords = await apiRelated('author', KNOWN_AUTHOR, 'text', 'linear');

    expect(listedAuthors(app.handles)).toEqual(
      wantAuthors.results.map((r) => ({ token: r.token, score: String(r.score) })),
    );
    expect(cloudWords(app.handles).map((w) => w.token)).toEqual(
      wantWords.results.map((r) => r.token),
    );
    expect(app.handles.queryLabel.textContent).toBe(
      `author: ${KNOWN_AUTHOR} (linear)`,
    );
  });

  it('sizes cloud words monotonically down the ranking', async () => {
    const app = await newApp();
    submit(app, KNOWN_AUTHOR, 'author');
    await waitFor(
      () => app.handles.cloudPane.querySelectorAll('span').length > 0,
      'word cloud',
    );
    const sizes = cloudWords(app.handles).map((w) => w.px);
    expect(sizes.length).toBeGreaterThan(1);
    for (let i = 1; i < sizes.length; i++) {
      expect(sizes[i]).toBeLessThanOrEqual(sizes[i - 1]);
    }
  });

  it('writes the canonical deep link into the location hash', async () => {
    const app = await newApp();
    submit(app, KNOWN_AUTHOR, 'author');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );
    expect(app.dom.window.location.hash).toBe(
      formatHash({ category: 'author', token: KNOWN_AUTHOR }, 'linear'),
    );
  });
});

describe('author navigation', () => {
  it('clicking a listed author re-queries both panes for that author', async () => {
    const app = await newApp();
    submit(app, KNOWN_AUTHOR, 'author');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );

    const target = await waitFor(() => {
      const buttons = [
        ...app.handles.authorList.querySelectorAll('button.author'),
      ] as HTMLButtonElement[];
      return buttons.find((b) => b.dataset.token !== KNOWN_AUTHOR);
    }, 'a different author to click');
    const clicked = target.dataset.token!;

    target.click();
    await waitFor(
      () => app.handles.queryLabel.textContent?.includes(clicked),
      'panes to switch to the clicked author',
    );

    const wantAuthors = await apiRelated('author', clicked, 'author', 'linear');
    const wantWords = await apiRelated('author', clicked, 'text', 'linear');
    expect(listedAuthors(app.handles).map((a) => a.token)).toEqual(
      wantAuthors.results.map((r) => r.token),
    );
    expect(cloudWords(app.handles).map((w) => w.token)).toEqual(
      wantWords.results.map((r) => r.token),
    );
    expect(app.handles.backButton.disabled).toBe(false);
  });

  it('back returns to the previous query', async () => {
    const app = await newApp();
    submit(app, KNOWN_AUTHOR, 'author');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );
    const target = await waitFor(() => {
      const buttons = [
        ...app.handles.authorList.querySelectorAll('button.author'),
      ] as HTMLButtonElement[];
      return buttons.find((b) => b.dataset.token !== KNOWN_AUTHOR);
    }, 'a different author to click');
    target.click();
    await waitFor(
      () => !app.handles.backButton.disabled,
      'back button to enable',
    );

    app.handles.backButton.click();
    await waitFor(
      () =>
        app.handles.queryLabel.textContent ===
        `author: ${KNOWN_AUTHOR} (linear)`,
      'return to the first query',
    );
    expect(app.handles.backButton.disabled).toBe(true);
    expect(app.handles.input.value).toBe(KNOWN_AUTHOR);
  });
});

describe('measure switching', () => {
  it('re-fetches the active query under the selected measure', async () => {
    const app = await newApp();
    submit(app, KNOWN_AUTHOR, 'author');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );

    radio(app, 'cosine').click();
    await waitFor(
      () => app.handles.queryLabel.textContent?.includes('(cosine)'),
      'cosine results',
    );

    const want = await apiRelated('author', KNOWN_AUTHOR, 'author', 'cosine');
    expect(listedAuthors(app.handles)).toEqual(
      want.results.map((r) => ({ token: r.token, score: String(r.score) })),
    );
    expect(app.dom.window.location.hash).toBe(
      formatHash({ category: 'author', token: KNOWN_AUTHOR }, 'cosine'),
    );
  });
});

describe('unknown queries', () => {
  it('shows suggestions without losing the current results', async () => {
    const app = await newApp();
    submit(app, KNOWN_AUTHOR, 'author');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );
    const before = listedAuthors(app.handles);

    submit(app, 'author a zz', 'author');
    await waitFor(
      () => !app.handles.suggestionsBox.hidden,
      'suggestions to appear',
    );
    expect(app.handles.suggestionsBox.textContent).toContain('author a zz');
    expect(listedAuthors(app.handles)).toEqual(before);
    expect(app.handles.queryLabel.textContent).toBe(
      `author: ${KNOWN_AUTHOR} (linear)`,
    );
  });

  it('clicking a suggestion runs that query', async () => {
    const app = await newApp();
    submit(app, 'author a zz', 'author');
    const suggestion = await waitFor(
      () =>
        app.handles.suggestionsBox.querySelector(
          'button.suggestion',
        ) as HTMLButtonElement | null,
      'a suggestion button',
    );
    const token = suggestion.textContent!;

    suggestion.click();
    await waitFor(
      () => app.handles.queryLabel.textContent?.includes(token),
      'suggested query to load',
    );
    expect(app.handles.suggestionsBox.hidden).toBe(true);
    expect(app.handles.authorList.children.length).toBeGreaterThan(0);
  });
});

describe('per-pane failures', () => {
  it('keeps the author pane alive when the cloud request is rejected', async () => {
    // a textual query under the linear measure cannot score textual
    // candidates, so the cloud request 400s while the author one succeeds
    const app = await newApp();
    submit(app, KNOWN_WORD, 'text');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );

    const want = await apiRelated('text', KNOWN_WORD, 'author', 'linear');
    expect(listedAuthors(app.handles).map((a) => a.token)).toEqual(
      want.results.map((r) => r.token),
    );
    expect(cloudWords(app.handles)).toEqual([]);

    const note = app.handles.root.querySelector('#cloud-note') as HTMLElement;
    expect(note.hidden).toBe(false);
    expect(note.textContent).not.toBe('');
    expect(app.handles.banner.hidden).toBe(true);
  });

  it('textual queries under dot fill both panes', async () => {
    const app = await newApp();
    submit(app, KNOWN_WORD, 'text');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );
    radio(app, 'dot').click();
    await waitFor(
      () => cloudWords(app.handles).length > 0,
      'cloud to fill under dot',
    );
    const note = app.handles.root.querySelector('#cloud-note') as HTMLElement;
    expect(note.hidden).toBe(true);
    const want = await apiRelated('text', KNOWN_WORD, 'text', 'dot');
    expect(cloudWords(app.handles).map((w) => w.token)).toEqual(
      want.results.map((r) => r.token),
    );
  });
});

describe('deep links', () => {
  it('restores a query from the boot-time hash', async () => {
    const hash = formatHash(
      { category: 'author', token: OTHER_AUTHOR },
      'cosine',
    );
    const app = await newApp(hash);
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list from deep link',
    );
    expect(app.handles.queryLabel.textContent).toBe(
      `author: ${OTHER_AUTHOR} (cosine)`,
    );
    expect(app.handles.input.value).toBe(OTHER_AUTHOR);
    expect(radio(app, 'cosine').checked).toBe(true);
  });

  it('follows hash changes while running', async () => {
    const app = await newApp();
    submit(app, KNOWN_AUTHOR, 'author');
    await waitFor(
      () => app.handles.authorList.children.length > 0,
      'author list',
    );

    app.dom.window.location.hash = formatHash(
      { category: 'author', token: OTHER_AUTHOR },
      'dot',
    );
    await waitFor(
      () =>
        app.handles.queryLabel.textContent ===
        `author: ${OTHER_AUTHOR} (dot)`,
      'hash navigation to land',
    );
    const want = await apiRelated('author', OTHER_AUTHOR, 'author', 'dot');
    expect(listedAuthors(app.handles).map((a) => a.token)).toEqual(
      want.results.map((r) => r.token),
    );
  });
});
