/**
 * End-to-end test against the real Python gateway: a synthetic-landmark
 * driver completes a full liveness session over the live WebSocket API,
 * uploads every requested snapshot, and receives a Passed verdict. Every
 * message in both directions is schema-validated by the session client.
 */

import { mkdtempSync, readdirSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { spawn, type ChildProcess } from 'node:child_process';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import WebSocket from 'ws';

import type { PromptEvent, ServerEvent } from '../src/schema.js';
import { SessionClient } from '../src/sessionClient.js';
import { SyntheticDriver } from '../src/syntheticDriver.js';

const PORT = 18500 + Math.floor(Math.random() * 1000);
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = fileURLToPath(new URL('../..', import.meta.url));

let server: ChildProcess;
let workDir: string;

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 150; i += 1) {
    try {
      const res = await fetch(`${BASE}/healthz`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await sleep(100);
  }
  throw new Error('gateway did not come up');
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), 'liveness-ui-'));
  server = spawn(
    'python3',
    ['-m', 'mvpipe.gateway.cli', 'charcha-serve', '--port', String(PORT)],
    {
      cwd: REPO_ROOT,
      env: {
        ...process.env,
        PYTHONPATH: join(REPO_ROOT, 'src'),
        MVPIPE_SESSIONS_DIR: join(workDir, 'sessions'),
        MVPIPE_JOBS_DIR: join(workDir, 'jobs'),
      },
      stdio: ['ignore', 'inherit', 'inherit'],
    },
  );
  await waitForServer();
}, 30000);

afterAll(() => {
  server?.kill('SIGKILL');
  rmSync(workDir, { recursive: true, force: true });
});

describe('liveness UI against the live engine', () => {
  it(
    'completes a passing session with exactly 7 snapshot uploads',
    async () => {
      const created = await fetch(`${BASE}/charcha/sessions`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ rng_seed: 42 }),
      });
      expect(created.status).toBe(201);
      const { id } = (await created.json()) as { id: string };

      const ws = new WebSocket(`ws://127.0.0.1:${PORT}/charcha/sessions/${id}/stream`);
      await new Promise<void>((resolve, reject) => {
        ws.once('open', () => resolve());
        ws.once('error', reject);
      });

      const events: ServerEvent[] = [];
      const protocolErrors: unknown[] = [];
      let activePrompt: PromptEvent | null = null;

      const client = new SessionClient({
        sink: {
          send: (data) => ws.send(data),
          canSend: () => ws.readyState === WebSocket.OPEN,
          close: () => ws.close(),
        },
        uploader: {
          upload: async (tag, image) => {
            const res = await fetch(
              `${BASE}/charcha/sessions/${id}/snapshot?tag=${encodeURIComponent(tag)}`,
              { method: 'POST', body: image },
            );
            if (res.status !== 202) throw new Error(`upload failed: ${res.status}`);
          },
        },
        grabSnapshot: () => new Uint8Array([0x89, 0x50, 0x4e, 0x47]),
        frameRateHz: 10,
        onEvent: (event) => {
          events.push(event);
          if (event.type === 'prompt') activePrompt = event;
        },
      });

      ws.on('message', (data) => {
        try {
          client.handleMessage(data.toString());
        } catch (err) {
          protocolErrors.push(err);
        }
      });

      // Drive a scripted face at 10 Hz of simulated time: neutral during
      // calibration and prepare phases, then hold each prompted action
      // until its deadline. The server decides everything else.
      const driver = new SyntheticDriver(7);
      for (let t = 0; t <= 200_000 && client.verdict === null; t += 100) {
        const prompt: PromptEvent | null = activePrompt;
        const action = prompt !== null && t < prompt.deadline_ms ? prompt.action : null;
        client.sendFrame(driver.frame(t, action));
        await sleep(2);
      }

      expect(protocolErrors).toEqual([]);
      expect(client.verdict).not.toBeNull();
      expect(client.verdict?.passed).toBe(true);
      expect(client.verdict?.failure_reason).toBeNull();
      expect(client.verdict?.scores).toHaveLength(6);
      for (const score of client.verdict?.scores ?? []) {
        expect(score.passed).toBe(true);
      }

      // Protocol shape: six prompts, one snapshot request per prompt plus
      // the neutral reference, and a terminal verdict.
      expect(events.filter((e) => e.type === 'prompt')).toHaveLength(6);
      expect(events.filter((e) => e.type === 'capture_request')).toHaveLength(7);
      expect(events.filter((e) => e.type === 'verdict')).toHaveLength(1);

      await client.settleUploads();
      expect(client.failedUploads).toEqual([]);
      expect(client.uploadedTags).toHaveLength(7);
      expect(client.uploadedTags).toContain('neutral');
      expect(client.view.phaseLabel).toBe('Verified');
      expect(client.droppedFrames).toBe(0);
      expect(client.streamRateWarning).toBe(false);

      // The engine confirms the verdict over plain HTTP too.
      const verdictRes = await fetch(`${BASE}/charcha/sessions/${id}/verdict`);
      expect(verdictRes.status).toBe(200);
      const verdict = (await verdictRes.json()) as { passed: boolean };
      expect(verdict.passed).toBe(true);

      // Passed-session snapshots are retained on disk, one per tag.
      await sleep(300);
      const stored = readdirSync(join(workDir, 'sessions', id, 'snapshots'));
      expect(stored).toHaveLength(7);
    },
    120_000,
  );

  it('rejects snapshot uploads for unknown sessions', async () => {
    const res = await fetch(`${BASE}/charcha/sessions/nope/snapshot?tag=neutral`, {
      method: 'POST',
      body: new Uint8Array([1]),
    });
    expect(res.status).toBe(404);
  });
});
