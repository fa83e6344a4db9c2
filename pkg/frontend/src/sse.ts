/**
 * Server-sent event subscription over fetch streaming.
 *
 * Implemented on ReadableStream rather than EventSource so the same code
 * runs in the browser and under the node test runner, and so disconnects
 * are observable: the client reconnects with capped backoff and reports
 * the outage through onGap.
 */

export interface SseEvent {
  event: string;
  data: unknown;
}

export interface EventStreamOptions {
  onEvent: (event: SseEvent) => void;
  /** called when the connection drops and a reconnect is scheduled */
  onGap?: (attempt: number) => void;
  /** called after a reconnect succeeds (replay point for consumers) */
  onReconnect?: () => void;
  backoffMs?: number;
  maxBackoffMs?: number;
}

export class EventStream {
  private stopped = false;
  private attempt = 0;
  private controller: AbortController | null = null;

  constructor(private url: string, private options: EventStreamOptions) {}

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        const response = await fetch(this.url, {
          headers: { Accept: "text/event-stream" },
          signal: this.controller.signal,
        });
        if (!response.ok || !response.body) {
          throw new Error(`events endpoint returned ${response.status}`);
        }
        if (this.attempt > 0) {
          this.options.onReconnect?.();
        }
        this.attempt = 0;
        await this.consume(response.body);
      } catch {
        if (this.stopped) return;
      }
      if (this.stopped) return;
      this.attempt += 1;
      this.options.onGap?.(this.attempt);
      const base = this.options.backoffMs ?? 250;
      const cap = this.options.maxBackoffMs ?? 4000;
      const delay = Math.min(cap, base * 2 ** Math.min(this.attempt - 1, 6));
      await sleep(delay);
    }
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    let eventName: string | null = null;
    let data = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return; // server closed: fall through to reconnect
      buffer += decoder.decode(value, { stream: true });
      let newline;
      while ((newline = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, newline).replace(/\r$/, "");
        buffer = buffer.slice(newline + 1);
        if (line.startsWith(":")) continue; // keep-alive comment
        if (line.startsWith("event:")) {
          eventName = line.slice(6).trim();
        } else if (line.startsWith("data:")) {
          data += line.slice(5).trim();
        } else if (line === "" && eventName !== null) {
          let parsed: unknown = data;
          try {
            parsed = JSON.parse(data);
          } catch {
            /* keep raw string */
          }
          this.options.onEvent({ event: eventName, data: parsed });
          eventName = null;
          data = "";
        }
      }
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
