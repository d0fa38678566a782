/**
 * Session client: streams landmark frames, folds server events into the
 * view model, and handles snapshot capture requests.
 *
 * Transport and upload are injected so the client runs identically under
 * a browser WebSocket, a node socket in tests, or a pure fake.
 */

import type {
  CaptureRequestEvent,
  ClientMessage,
  FrameMessage,
  ServerEvent,
  VerdictEvent,
} from './schema.js';
import { clientMessage, parseServerEvent } from './schema.js';
import type { UiSessionView } from './view.js';
import { applyEvent, initialView, tickCountdown } from './view.js';

export interface MessageSink {
  send(data: string): void;
  /** False while the transport is backpressured. */
  canSend(): boolean;
  close(): void;
}

export interface SnapshotUploader {
  upload(tag: string, image: Uint8Array): Promise<void>;
}

export interface SessionClientOptions {
  sink: MessageSink;
  uploader: SnapshotUploader;
  /** Returns the current camera frame as encoded image bytes. */
  grabSnapshot: () => Uint8Array;
  /** Nominal stream rate; also sizes the 1 s backpressure buffer. */
  frameRateHz?: number;
  onEvent?: (event: ServerEvent) => void;
}

export const MIN_STREAM_RATE_HZ = 10;

export class SessionClient {
  view: UiSessionView = initialView();
  verdict: VerdictEvent | null = null;
  uploadedTags: string[] = [];
  failedUploads: string[] = [];
  droppedFrames = 0;
  streamRateWarning = false;

  private readonly queue: ClientMessage[] = [];
  private readonly maxQueued: number;
  private readonly sentTimestamps: number[] = [];
  private deadlineMs: number | null = null;
  private pendingUploads: Promise<void>[] = [];

  constructor(private readonly opts: SessionClientOptions) {
    this.maxQueued = Math.max(1, Math.round(opts.frameRateHz ?? 20));
  }

  /** Queue one landmark frame; beyond 1 s of backlog the oldest drops. */
  sendFrame(frame: FrameMessage): void {
    this.enqueue(clientMessage.parse(frame));
    this.trackRate(frame.t_ms);
  }

  sendTick(tMs: number): void {
    this.enqueue({ type: 'tick', t_ms: tMs });
    if (this.deadlineMs !== null) {
      this.view = tickCountdown(this.view, this.deadlineMs, tMs);
    }
  }

  end(): void {
    this.enqueue({ type: 'end' });
  }

  /** Handle one raw server payload. Returns the parsed event. */
  handleMessage(raw: string | unknown): ServerEvent {
    const event = parseServerEvent(raw);
    if (event.type === 'prompt') this.deadlineMs = event.deadline_ms;
    if (event.type === 'verdict') this.verdict = event;
    this.view = applyEvent(this.view, event, {
      deadlineMs: this.deadlineMs,
      localMs: this.lastSentMs(),
    });
    if (event.type === 'capture_request') {
      this.pendingUploads.push(this.captureAndUpload(event));
    }
    this.opts.onEvent?.(event);
    return event;
  }

  /** Resolves when all requested snapshot uploads have settled. */
  async settleUploads(): Promise<void> {
    await Promise.all(this.pendingUploads);
  }

  flush(): void {
    while (this.queue.length > 0 && this.opts.sink.canSend()) {
      this.opts.sink.send(JSON.stringify(this.queue.shift()));
    }
  }

  close(): void {
    this.opts.sink.close();
  }

  private enqueue(msg: ClientMessage): void {
    this.queue.push(msg);
    while (this.queue.length > this.maxQueued) {
      // drop-oldest, but never drop the end-of-stream marker
      const idx = this.queue.findIndex((m) => m.type !== 'end');
      if (idx < 0) break;
      this.queue.splice(idx, 1);
      this.droppedFrames += 1;
    }
    this.flush();
  }

  private async captureAndUpload(event: CaptureRequestEvent): Promise<void> {
    const image = this.opts.grabSnapshot();
    try {
      await this.opts.uploader.upload(event.tag, image);
    } catch {
      try {
        // one retry; a second failure is flagged and the session continues
        await this.opts.uploader.upload(event.tag, image);
      } catch {
        this.failedUploads.push(event.tag);
        return;
      }
    }
    this.uploadedTags.push(event.tag);
  }

  private trackRate(tMs: number): void {
    this.sentTimestamps.push(tMs);
    const cutoff = tMs - 1000;
    while (this.sentTimestamps.length > 0 && (this.sentTimestamps[0] ?? 0) < cutoff) {
      this.sentTimestamps.shift();
    }
    if (tMs >= 1000) {
      this.streamRateWarning = this.sentTimestamps.length < MIN_STREAM_RATE_HZ;
    }
  }

  private lastSentMs(): number {
    return this.sentTimestamps[this.sentTimestamps.length - 1] ?? 0;
  }
}
