/**
 * The live-run loop: stream record events into the buffer, follow the
 * cursor, and heal disconnects by replaying the persisted dataset.
 *
 * Record events can be missed while the connection is down; the book that
 * lands at the end of the run carries every row, so merging it through the
 * index-keyed buffer restores a complete, duplicate-free view.  Rows are
 * scoped to one run: a record event carrying a new run id resets the buffer.
 */

import { ApiClient } from "./api.js";
import { EventStream, SseEvent } from "./sse.js";
import { LiveBuffer } from "./state.js";

export interface RecordEvent {
  id: string;
  index: number;
  marginals: number[];
  energy: number;
  state: string;
}

export interface LiveViewHooks {
  onRows?: () => void;
  onBook?: (id: string) => void;
  onGap?: (attempt: number) => void;
  onConnected?: () => void;
}

export class LiveView {
  readonly buffer = new LiveBuffer();
  cursor = 0;
  currentRunId: string | null = null;
  private stream: EventStream | null = null;

  constructor(
    private api: ApiClient,
    private hooks: LiveViewHooks = {},
    private eventsUrl?: string,
  ) {}

  start(): void {
    const url =
      this.eventsUrl ?? this.api.baseUrl.replace(/\/$/, "") + "/events";
    this.stream = new EventStream(url, {
      onEvent: (event) => void this.handle(event),
      onGap: (attempt) => this.hooks.onGap?.(attempt),
      onReconnect: () => void this.heal(),
      backoffMs: 100,
    });
    this.stream.start();
    // resuming after an explicit stop: pull whatever was persisted meanwhile
    if (this.currentRunId !== null) {
      void this.heal();
    }
  }

  stop(): void {
    this.stream?.stop();
  }

  private async handle(event: SseEvent): Promise<void> {
    if (event.event === "records") {
      const record = event.data as RecordEvent;
      if (record.id !== this.currentRunId) {
        this.currentRunId = record.id;
        this.buffer.clear();
      }
      this.buffer.push({
        index: record.index,
        marginals: record.marginals,
        energy: record.energy,
        state: record.state,
      });
      this.cursor = record.index;
      this.hooks.onRows?.();
    } else if (event.event === "book") {
      const { id } = event.data as { id: string };
      if (this.currentRunId === null || id === this.currentRunId) {
        await this.replay(id);
      }
      this.hooks.onBook?.(id);
    }
  }

  /** Merge the persisted dataset over whatever streamed in. */
  async replay(bookId: string): Promise<void> {
    const book = await this.api.getBook(bookId);
    if (book) {
      this.currentRunId = book.id;
      this.buffer.replayBook(book.marginals, book.values, book.states);
      this.hooks.onRows?.();
    }
  }

  /** After an outage: replay the current run's book if it landed meanwhile. */
  private async heal(): Promise<void> {
    this.hooks.onConnected?.();
    if (this.currentRunId !== null) {
      await this.replay(this.currentRunId).catch(() => undefined);
    }
  }
}
