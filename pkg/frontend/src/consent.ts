/**
 * Consent gate: camera access and the WebSocket only come after an
 * explicit opt-in, and denial never opens a connection.
 */

export type ConsentScreen =
  | 'consent'
  | 'denied'
  | 'unsupported'
  | 'ready';

export interface CameraEnvironment {
  /** Ask the platform for camera access; rejects on denial. */
  requestCamera: () => Promise<unknown>;
  /** Whether on-device landmark extraction is available. */
  landmarkerAvailable: () => boolean;
}

export class ConsentGate {
  screen: ConsentScreen = 'consent';
  socketsOpened = 0;

  constructor(
    private readonly env: CameraEnvironment,
    private readonly openSocket: () => void,
  ) {}

  /** User accepted the consent screen; try to bring the camera up. */
  async accept(): Promise<ConsentScreen> {
    if (this.screen !== 'consent') return this.screen;
    if (!this.env.landmarkerAvailable()) {
      this.screen = 'unsupported';
      return this.screen;
    }
    try {
      await this.env.requestCamera();
    } catch {
      this.screen = 'denied';
      return this.screen;
    }
    this.screen = 'ready';
    this.socketsOpened += 1;
    this.openSocket();
    return this.screen;
  }

  decline(): ConsentScreen {
    if (this.screen === 'consent') this.screen = 'denied';
    return this.screen;
  }
}
