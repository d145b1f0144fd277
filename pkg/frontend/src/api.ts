// Thin typed client over the workbench HTTP API. All state lives server-side;
// this module only shapes requests and decodes responses.

import type {
  AgreementSnapshotJson,
  CompareResponse,
  ComponentScores,
  PaintingJson,
  PaintingPage,
  SubmitResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Error carrying the HTTP status and the service's `detail` message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function decode<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (typeof body.detail === 'string') detail = body.detail;
      else if (body.detail !== undefined) detail = JSON.stringify(body.detail);
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class WorkbenchClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  async listPaintings(page = 1, pageSize = 50): Promise<PaintingPage> {
    const response = await this.fetchImpl(
      this.url(`/paintings?page=${page}&page_size=${pageSize}`),
    );
    return decode<PaintingPage>(response);
  }

  async getPainting(id: string): Promise<PaintingJson> {
    const response = await this.fetchImpl(this.url(`/paintings/${id}`));
    return decode<PaintingJson>(response);
  }

  imageUrl(id: string): string {
    return this.url(`/paintings/${id}/image`);
  }

  async submitRating(
    paintingId: string,
    raterId: string,
    components: ComponentScores,
  ): Promise<SubmitResponse> {
    const response = await this.fetchImpl(this.url(`/paintings/${paintingId}/ratings`), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ rater_id: raterId, ...components }),
    });
    return decode<SubmitResponse>(response);
  }

  async agreement(): Promise<AgreementSnapshotJson> {
    const response = await this.fetchImpl(this.url('/agreement'));
    return decode<AgreementSnapshotJson>(response);
  }

  async compare(paintingId: string, checkpoint: string): Promise<CompareResponse> {
    const response = await this.fetchImpl(
      this.url(`/paintings/${paintingId}/compare?checkpoint=${encodeURIComponent(checkpoint)}`),
    );
    return decode<CompareResponse>(response);
  }
}
