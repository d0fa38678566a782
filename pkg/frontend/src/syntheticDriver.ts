/**
 * Synthetic landmark driver: a scripted face for demos and tests.
 *
 * Produces the same neutral geometry and action deformations the engine's
 * own tests use, so a driver-fed session passes without a camera.
 */

import type { ActionKind, FrameMessage, PointName } from './schema.js';
import { REQUIRED_POINTS } from './schema.js';

type Point = [number, number, number];

const NEUTRAL: Record<PointName, Point> = {
  nose_tip: [0.5, 0.55, 0],
  chin: [0.5, 0.75, 0],
  left_eye_outer: [0.3, 0.4, 0],
  left_eye_inner: [0.38, 0.4, 0],
  right_eye_outer: [0.7, 0.4, 0],
  right_eye_inner: [0.62, 0.4, 0],
  left_eye_upper: [0.34, 0.385, 0],
  left_eye_lower: [0.34, 0.415, 0],
  right_eye_upper: [0.66, 0.385, 0],
  right_eye_lower: [0.66, 0.415, 0],
  left_mouth_corner: [0.42, 0.65, 0],
  right_mouth_corner: [0.58, 0.65, 0],
  upper_lip: [0.5, 0.64, 0],
  lower_lip: [0.5, 0.66, 0],
  left_brow: [0.34, 0.33, 0],
  right_brow: [0.66, 0.33, 0],
  face_oval_left: [0.22, 0.5, 0],
  face_oval_right: [0.78, 0.5, 0],
};

const INTEROCULAR = 0.32;

export function facePoints(action: ActionKind | null): Record<PointName, Point> {
  const p = Object.fromEntries(
    REQUIRED_POINTS.map((name) => [name, [...NEUTRAL[name]] as Point]),
  ) as Record<PointName, Point>;
  switch (action) {
    case 'turn_left':
      p.nose_tip[0] -= 0.3 * INTEROCULAR;
      break;
    case 'turn_right':
      p.nose_tip[0] += 0.3 * INTEROCULAR;
      break;
    case 'look_up':
      p.nose_tip[1] -= 0.3 * INTEROCULAR;
      break;
    case 'smile':
      p.left_mouth_corner[0] -= 0.024;
      p.right_mouth_corner[0] += 0.024;
      break;
    case 'open_mouth':
      p.lower_lip[1] += 0.04;
      p.chin[1] += 0.04;
      break;
    case 'raise_eyebrows':
      p.left_brow[1] -= 0.03;
      p.right_brow[1] -= 0.03;
      break;
    case 'wink':
      p.left_eye_upper[1] = 0.395;
      p.left_eye_lower[1] = 0.405;
      break;
    case null:
      break;
  }
  return p;
}

/** Deterministic jitter so traces never trip the static-input heuristic. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class SyntheticDriver {
  private readonly rand: () => number;

  constructor(seed = 1, private readonly jitterSigma = 0.002) {
    this.rand = mulberry32(seed);
  }

  frame(tMs: number, action: ActionKind | null): FrameMessage {
    const points: Record<string, Point> = {};
    for (const [name, [x, y, z]] of Object.entries(facePoints(action))) {
      points[name] = [x + this.gauss(), y + this.gauss(), z];
    }
    return { type: 'frame', t_ms: tMs, face_present: true, points };
  }

  private gauss(): number {
    // Box-Muller on the seeded uniform stream
    const u = Math.max(this.rand(), 1e-12);
    const v = this.rand();
    return this.jitterSigma * Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
}
