/** WebSocket wrapper for a live test session's telemetry stream.
 *
 * The socket constructor is injectable so the same class runs in the
 * browser (global WebSocket) and in node tests (the `ws` package, which
 * exposes the same on* handler API).
 */

import type { ProfileDoc, Telemetry } from './types.js';

export type StreamEvent =
  | { kind: 'telemetry'; sample: Telemetry }
  | { kind: 'server_error'; detail: string }
  | { kind: 'closed'; code: number; reason: string };

export interface SocketLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event: { code: number; reason: string }) => void) | null;
  send(data: string): void;
  close(code?: number): void;
}

export type SocketCtor = new (url: string) => SocketLike;

export class TelemetryStream {
  private readonly socket: SocketLike;

  constructor(url: string, onEvent: (event: StreamEvent) => void, Socket?: SocketCtor) {
    const Ctor = Socket ?? (globalThis as { WebSocket?: SocketCtor }).WebSocket;
    if (!Ctor) throw new Error('no WebSocket implementation available');
    this.socket = new Ctor(url);
    this.socket.onmessage = (event) => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(String(event.data));
      } catch {
        onEvent({ kind: 'server_error', detail: 'unparseable stream message' });
        return;
      }
      const message = parsed as Record<string, unknown>;
      if (message.type === 'error') {
        onEvent({ kind: 'server_error', detail: String(message.detail ?? 'unknown error') });
      } else {
        onEvent({ kind: 'telemetry', sample: parsed as Telemetry });
      }
    };
    this.socket.onclose = (event) =>
      onEvent({ kind: 'closed', code: event.code, reason: event.reason });
  }

  /** Hot-swap the running session's profile at its next tick. */
  updateProfile(profile: ProfileDoc): void {
    this.socket.send(JSON.stringify({ type: 'update_profile', profile }));
  }

  close(): void {
    this.socket.close();
  }
}
