/** Typed client for the model-serving JSON API. */

export type Measure = 'linear' | 'dot' | 'cosine';

export const MEASURES: readonly Measure[] = ['linear', 'dot', 'cosine'];

export interface CategoryInfo {
  name: string;
  kind: string;
  size: number;
}

export interface CategoriesResponse {
  categories: CategoryInfo[];
  defaults: { measure: Measure; k: number };
}

export interface ElementResponse {
  category: string;
  token: string;
  index: number;
  frequency: number;
}

export interface RelatedItem {
  token: string;
  category: string;
  score: number;
}

export interface RelatedResponse {
  query: {
    category: string;
    token: string;
    target: string;
    measure: Measure;
    k: number;
  };
  results: RelatedItem[];
}

/** Non-2xx response; a 404 carries the server's spelling suggestions. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly suggestions: string[] = [],
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export type FetchLike = (url: string) => Promise<Response>;

export class Client {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async get<T>(path: string): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path);
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message =
        typeof body.error === 'string'
          ? body.error
          : `request failed with status ${response.status}`;
      const suggestions = Array.isArray(body.suggestions)
        ? body.suggestions
        : [];
      throw new ApiError(response.status, message, suggestions);
    }
    return body as T;
  }

  categories(): Promise<CategoriesResponse> {
    return this.get('/api/categories');
  }

  element(category: string, token: string): Promise<ElementResponse> {
    const params = new URLSearchParams({ category, token });
    return this.get(`/api/element?${params}`);
  }

  related(
    category: string,
    token: string,
    target: string,
    measure: Measure,
    k?: number,
  ): Promise<RelatedResponse> {
    const params = new URLSearchParams({ category, token, target, measure });
    if (k !== undefined) params.set('k', String(k));
    return this.get(`/api/related?${params}`);
  }
}
