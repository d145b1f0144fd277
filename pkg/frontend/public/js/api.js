// Thin typed client over the workbench HTTP API. All state lives server-side;
// this module only shapes requests and decodes responses.
/** Error carrying the HTTP status and the service's `detail` message. */
export class ApiError extends Error {
    constructor(status, detail) {
        super(`HTTP ${status}: ${detail}`);
        this.status = status;
        this.detail = detail;
    }
}
async function decode(response) {
    if (!response.ok) {
        let detail = response.statusText;
        try {
            const body = (await response.json());
            if (typeof body.detail === 'string')
                detail = body.detail;
            else if (body.detail !== undefined)
                detail = JSON.stringify(body.detail);
        }
        catch {
            // non-JSON error body: keep the status text
        }
        throw new ApiError(response.status, detail);
    }
    return (await response.json());
}
export class WorkbenchClient {
    constructor(baseUrl, fetchImpl = (input, init) => fetch(input, init)) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    url(path) {
        return this.baseUrl.replace(/\/$/, '') + path;
    }
    async listPaintings(page = 1, pageSize = 50) {
        const response = await this.fetchImpl(this.url(`/paintings?page=${page}&page_size=${pageSize}`));
        return decode(response);
    }
    async getPainting(id) {
        const response = await this.fetchImpl(this.url(`/paintings/${id}`));
        return decode(response);
    }
    imageUrl(id) {
        return this.url(`/paintings/${id}/image`);
    }
    async submitRating(paintingId, raterId, components) {
        const response = await this.fetchImpl(this.url(`/paintings/${paintingId}/ratings`), {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body: JSON.stringify({ rater_id: raterId, ...components }),
        });
        return decode(response);
    }
    async agreement() {
        const response = await this.fetchImpl(this.url('/agreement'));
        return decode(response);
    }
    async compare(paintingId, checkpoint) {
        const response = await this.fetchImpl(this.url(`/paintings/${paintingId}/compare?checkpoint=${encodeURIComponent(checkpoint)}`));
        return decode(response);
    }
}
