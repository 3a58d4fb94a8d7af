/** DOM wiring for the explorer: query form, measure radios, word cloud,
 * clickable author list, error banner, suggestion list, and #/q/ deep
 * links.  All state transitions go through the ExplorerStore. */

import { CategoriesResponse, Client, Measure, MEASURES } from './api.js';
import { renderWordCloud } from './cloud.js';
import { ExplorerStore, Query, sameQuery } from './state.js';

export interface AppHandles {
  store: ExplorerStore;
  root: HTMLElement;
  input: HTMLInputElement;
  categorySelect: HTMLSelectElement;
  form: HTMLFormElement;
  backButton: HTMLButtonElement;
  banner: HTMLElement;
  suggestionsBox: HTMLElement;
  cloudPane: HTMLElement;
  authorList: HTMLOListElement;
  queryLabel: HTMLElement;
  /** Resolves once the categories are loaded and any deep link applied. */
  ready: Promise<void>;
}

export function parseHash(hash: string): { query: Query; measure: Measure } | null {
  const match = /^#\/q\/([^/]+)\/([^/]+)\/([^/]+)$/.exec(hash);
  if (!match) return null;
  const measure = decodeURIComponent(match[3]) as Measure;
  if (!MEASURES.includes(measure)) return null;
  return {
    query: {
      category: decodeURIComponent(match[1]),
      token: decodeURIComponent(match[2]),
    },
    measure,
  };
}

export function formatHash(query: Query, measure: Measure): string {
  return (
    `#/q/${encodeURIComponent(query.category)}` +
    `/${encodeURIComponent(query.token)}/${encodeURIComponent(measure)}`
  );
}

const SKELETON = `
  <form id="query-form">
    <select id="category-select" aria-label="query category"></select>
    <input id="query-input" type="text" placeholder="query token"
           aria-label="query token">
    <button type="submit">Search</button>
    <button type="button" id="back-button" disabled>Back</button>
  </form>
  <fieldset id="measure-set" aria-label="similarity measure"></fieldset>
  <div id="error-banner" class="banner" hidden></div>
  <div id="suggestions" hidden></div>
  <p id="query-label"></p>
  <main>
    <section>
      <h2>Related words</h2>
      <div id="cloud"></div>
      <p id="cloud-note" class="pane-note" hidden></p>
    </section>
    <section>
      <h2>Similar authors</h2>
      <ol id="author-list"></ol>
      <p id="list-note" class="pane-note" hidden></p>
    </section>
  </main>
`;

function pickTargets(info: CategoriesResponse): { cloud: string; list: string } {
  const textual = info.categories.find((c) => c.kind === 'textual');
  const nonTextual = info.categories.filter((c) => c.kind !== 'textual');
  const author =
    nonTextual.find((c) => c.name === 'author') ?? nonTextual[0];
  return { cloud: textual?.name ?? 'text', list: author?.name ?? 'author' };
}

export function initApp(win: Window, client?: Client): AppHandles {
  const doc = win.document;
  const api = client ?? new Client('');
  const root = doc.createElement('div');
  root.id = 'explorer';
  root.innerHTML = SKELETON;
  doc.body.appendChild(root);

  const input = root.querySelector('#query-input') as HTMLInputElement;
  const categorySelect = root.querySelector(
    '#category-select',
  ) as HTMLSelectElement;
  const form = root.querySelector('#query-form') as HTMLFormElement;
  const backButton = root.querySelector('#back-button') as HTMLButtonElement;
  const measureSet = root.querySelector('#measure-set') as HTMLElement;
  const banner = root.querySelector('#error-banner') as HTMLElement;
  const suggestionsBox = root.querySelector('#suggestions') as HTMLElement;
  const cloudPane = root.querySelector('#cloud') as HTMLElement;
  const cloudNote = root.querySelector('#cloud-note') as HTMLElement;
  const authorList = root.querySelector('#author-list') as HTMLOListElement;
  const listNote = root.querySelector('#list-note') as HTMLElement;
  const queryLabel = root.querySelector('#query-label') as HTMLElement;

  for (const measure of MEASURES) {
    const label = doc.createElement('label');
    const radio = doc.createElement('input');
    radio.type = 'radio';
    radio.name = 'measure';
    radio.value = measure;
    radio.addEventListener('change', () => {
      void store.selectMeasure(measure);
    });
    label.appendChild(radio);
    label.appendChild(doc.createTextNode(measure));
    measureSet.appendChild(label);
  }

  // Targets are refined once /api/categories arrives; the conventional
  // names cover the standard five-category model meanwhile.
  const store = new ExplorerStore(api, 'text', 'author');
  let lastRendered: Query | null = null;

  function render(): void {
    for (const radio of measureSet.querySelectorAll('input')) {
      (radio as HTMLInputElement).checked = radio.value === store.measure;
    }
    backButton.disabled = store.history.length === 0;

    banner.hidden = !store.error;
    banner.textContent = store.error ?? '';

    suggestionsBox.hidden = !store.notFound;
    suggestionsBox.textContent = '';
    if (store.notFound) {
      const note = doc.createElement('p');
      note.textContent = store.notFound.message;
      suggestionsBox.appendChild(note);
      for (const suggestion of store.notFound.suggestions) {
        const button = doc.createElement('button');
        button.type = 'button';
        button.className = 'suggestion';
        button.textContent = suggestion;
        button.addEventListener('click', () => {
          input.value = suggestion;
          void store.submitQuery(suggestion, categorySelect.value);
        });
        suggestionsBox.appendChild(button);
      }
    }

    if (store.query && !sameQuery(lastRendered, store.query)) {
      input.value = store.query.token;
      categorySelect.value = store.query.category;
      lastRendered = store.query;
    }
    queryLabel.textContent = store.query
      ? `${store.query.category}: ${store.query.token} (${store.measure})`
      : '';

    const cloud = store.results[store.cloudTarget];
    renderWordCloud(cloudPane, cloud ? cloud.results : []);
    const cloudError = store.paneErrors[store.cloudTarget];
    cloudNote.hidden = !cloudError;
    cloudNote.textContent = cloudError ?? '';

    const listed = store.results[store.listTarget];
    authorList.textContent = '';
    if (listed) {
      for (const item of listed.results) {
        const li = doc.createElement('li');
        const button = doc.createElement('button');
        button.type = 'button';
        button.className = 'author';
        button.dataset.token = item.token;
        button.textContent = item.token;
        button.addEventListener('click', () => {
          void store.clickAuthor(item.token);
        });
        const score = doc.createElement('span');
        score.className = 'score';
        score.textContent = String(item.score);
        li.appendChild(button);
        li.appendChild(score);
        authorList.appendChild(li);
      }
    }
    const listError = store.paneErrors[store.listTarget];
    listNote.hidden = !listError;
    listNote.textContent = listError ?? '';

    if (store.query) {
      const canonical = formatHash(store.query, store.measure);
      if (win.location.hash !== canonical) {
        win.location.hash = canonical;
      }
    }
  }

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    void store.submitQuery(input.value, categorySelect.value);
  });
  backButton.addEventListener('click', () => {
    void store.back();
  });
  win.addEventListener('hashchange', () => {
    const parsed = parseHash(win.location.hash);
    if (!parsed) return;
    if (sameQuery(parsed.query, store.query) && parsed.measure === store.measure)
      return;
    void store.restore(parsed.query, parsed.measure);
  });

  const ready = (async () => {
    let info: CategoriesResponse | null = null;
    try {
      info = await api.categories();
    } catch (err) {
      banner.hidden = false;
      banner.textContent = err instanceof Error ? err.message : String(err);
    }
    if (info) {
      const targets = pickTargets(info);
      store.cloudTarget = targets.cloud;
      store.listTarget = targets.list;
      for (const category of info.categories) {
        const option = doc.createElement('option');
        option.value = category.name;
        option.textContent = `${category.name} (${category.size})`;
        categorySelect.appendChild(option);
      }
      categorySelect.value =
        info.categories.find((c) => c.name === 'author')?.name ??
        info.categories[0]?.name ??
        '';
      store.measure = info.defaults.measure;
    }
    store.subscribe(render);
    render();
    const parsed = parseHash(win.location.hash);
    if (parsed) {
      await store.restore(parsed.query, parsed.measure);
    }
  })();

  return {
    store,
    root,
    input,
    categorySelect,
    form,
    backButton,
    banner,
    suggestionsBox,
    cloudPane,
    authorList,
    queryLabel,
    ready,
  };
}
