/**
 * Wire schema for the CHARCHA engine's WebSocket protocol.
 *
 * The server is authoritative: the UI renders only what these messages
 * say. Every inbound and outbound message must validate here.
 */

import { z } from 'zod';

export const REQUIRED_POINTS = [
  'nose_tip',
  'chin',
  'left_eye_outer',
  'left_eye_inner',
  'right_eye_outer',
  'right_eye_inner',
  'left_eye_upper',
  'left_eye_lower',
  'right_eye_upper',
  'right_eye_lower',
  'left_mouth_corner',
  'right_mouth_corner',
  'upper_lip',
  'lower_lip',
  'left_brow',
  'right_brow',
  'face_oval_left',
  'face_oval_right',
] as const;

export type PointName = (typeof REQUIRED_POINTS)[number];

export const ACTIONS = [
  'turn_left',
  'turn_right',
  'look_up',
  'smile',
  'open_mouth',
  'raise_eyebrows',
  'wink',
] as const;

export type ActionKind = (typeof ACTIONS)[number];

const point = z.tuple([z.number(), z.number(), z.number()]);

// -- client -> server ------------------------------------------------------

export const frameMessage = z.object({
  type: z.literal('frame'),
  t_ms: z.number().int().nonnegative(),
  face_present: z.boolean(),
  points: z.record(z.string(), point),
});

export const tickMessage = z.object({
  type: z.literal('tick'),
  t_ms: z.number().int().nonnegative(),
});

export const endMessage = z.object({ type: z.literal('end') });

export const clientMessage = z.discriminatedUnion('type', [
  frameMessage,
  tickMessage,
  endMessage,
]);

// -- server -> client ------------------------------------------------------

export const promptEvent = z.object({
  type: z.literal('prompt'),
  action: z.enum(ACTIONS),
  deadline_ms: z.number().int().nonnegative(),
});

export const secondScoreEvent = z.object({
  type: z.literal('second_score'),
  second: z.number().int().min(0).max(9),
  hit: z.boolean(),
});

export const captureRequestEvent = z.object({
  type: z.literal('capture_request'),
  tag: z.string().min(1),
});

export const actionScore = z.object({
  action: z.enum(ACTIONS),
  per_second: z.array(z.boolean()).length(10),
  score: z.number().int().min(0).max(10),
  passed: z.boolean(),
});

export const verdictEvent = z.object({
  type: z.literal('verdict'),
  passed: z.boolean(),
  failure_reason: z.string().nullable(),
  scores: z.array(actionScore),
  spoof_flags: z.array(z.string()),
});

export const serverEvent = z.discriminatedUnion('type', [
  promptEvent,
  secondScoreEvent,
  captureRequestEvent,
  verdictEvent,
]);

export type FrameMessage = z.infer<typeof frameMessage>;
export type TickMessage = z.infer<typeof tickMessage>;
export type ClientMessage = z.infer<typeof clientMessage>;
export type PromptEvent = z.infer<typeof promptEvent>;
export type SecondScoreEvent = z.infer<typeof secondScoreEvent>;
export type CaptureRequestEvent = z.infer<typeof captureRequestEvent>;
export type VerdictEvent = z.infer<typeof verdictEvent>;
export type ServerEvent = z.infer<typeof serverEvent>;

/** Parse a raw server payload; throws ZodError on schema violations. */
export function parseServerEvent(raw: unknown): ServerEvent {
  return serverEvent.parse(typeof raw === 'string' ? JSON.parse(raw) : raw);
}
