/** Typed client for the session's HTTP surface. */

export interface BookIndexEntry {
  id: string;
  created_at: string;
}

export interface BookData {
  id: string;
  created_at: string;
  config: Record<string, unknown>;
  qubo_csv: string;
  operators: string[];
  raw: Array<Record<string, number>>;
  marginals: number[][];
  values: number[];
  states: string[];
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async health(): Promise<boolean> {
    try {
      const response = await fetch(this.url("/health"));
      return response.ok;
    } catch {
      return false;
    }
  }

  async listBooks(): Promise<BookIndexEntry[]> {
    const response = await fetch(this.url("/books"));
    if (!response.ok) throw new Error(`GET /books failed: ${response.status}`);
    return (await response.json()) as BookIndexEntry[];
  }

  async getBook(id: string): Promise<BookData | null> {
    const response = await fetch(this.url(`/books/${id}`));
    if (response.status === 404) return null;
    if (!response.ok) throw new Error(`GET /books/${id} failed: ${response.status}`);
    return (await response.json()) as BookData;
  }

  async latestBook(): Promise<BookData | null> {
    const response = await fetch(this.url("/books/latest"));
    if (response.status === 404) return null;
    if (!response.ok) throw new Error(`GET /books/latest failed: ${response.status}`);
    return (await response.json()) as BookData;
  }

  /** Upload a validated QUBO CSV; the server re-validates and may 400. */
  async postQubo(csv: string): Promise<void> {
    const response = await fetch(this.url("/session/qubo"), {
      method: "POST",
      headers: { "Content-Type": "text/csv" },
      body: csv,
    });
    if (!response.ok) {
      const body = (await response.json().catch(() => ({}))) as { error?: string };
      throw new Error(body.error ?? `qubo upload failed: ${response.status}`);
    }
  }

  async startRun(): Promise<string> {
    const response = await fetch(this.url("/session/run"), { method: "POST" });
    const body = (await response.json().catch(() => ({}))) as {
      id?: string;
      error?: string;
    };
    if (!response.ok) {
      throw new Error(body.error ?? `run trigger failed: ${response.status}`);
    }
    return body.id ?? "";
  }

  async stopSound(): Promise<void> {
    await fetch(this.url("/session/stop"), { method: "POST" });
  }
}
