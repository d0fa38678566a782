/**
 * UiSessionView: the render model for a live session.
 *
 * Purely a fold over server messages plus the local clock; the UI never
 * computes scores or verdicts itself.
 */

import type { ActionKind, ServerEvent, VerdictEvent } from './schema.js';

export const ACTION_ICONS: Record<ActionKind, string> = {
  turn_left: '←',
  turn_right: '→',
  look_up: '↑',
  smile: '☺',
  open_mouth: 'O',
  raise_eyebrows: '↑↑',
  wink: ';)',
};

export interface UiSessionView {
  phaseLabel: string;
  activeAction: ActionKind | null;
  actionIcon: string | null;
  /** Seconds until the active action deadline, from the local clock. */
  countdownSeconds: number | null;
  /** Ten dots for the current window; null = not scored yet. */
  hitDots: (boolean | null)[];
  attempt: number;
  actionsCompleted: number;
  verdict: VerdictEvent | null;
}

export function initialView(): UiSessionView {
  return {
    phaseLabel: 'Calibrating: hold still and look at the camera',
    activeAction: null,
    actionIcon: null,
    countdownSeconds: null,
    hitDots: Array(10).fill(null),
    attempt: 1,
    actionsCompleted: 0,
    verdict: null,
  };
}

interface ViewClock {
  deadlineMs: number | null;
  localMs: number;
}

/** Fold one server event into the view; returns a new view object. */
export function applyEvent(
  view: UiSessionView,
  event: ServerEvent,
  clock: ViewClock = { deadlineMs: null, localMs: 0 },
): UiSessionView {
  switch (event.type) {
    case 'prompt': {
      const windowDone = view.activeAction !== null;
      return {
        ...view,
        phaseLabel: `Get ready: ${event.action.replace(/_/g, ' ')}`,
        activeAction: event.action,
        actionIcon: ACTION_ICONS[event.action],
        countdownSeconds: Math.max(
          0,
          Math.ceil((event.deadline_ms - clock.localMs) / 1000),
        ),
        hitDots: Array(10).fill(null),
        actionsCompleted: view.actionsCompleted + (windowDone ? 1 : 0),
      };
    }
    case 'second_score': {
      const hitDots = view.hitDots.slice();
      hitDots[event.second] = event.hit;
      return { ...view, hitDots };
    }
    case 'capture_request':
      // capture is a side effect handled by the session client; the view
      // only needs to keep rendering the current phase
      return view;
    case 'verdict':
      return {
        ...view,
        phaseLabel: event.passed
          ? 'Verified'
          : `Failed: ${event.failure_reason ?? 'unknown'}`,
        activeAction: null,
        actionIcon: null,
        countdownSeconds: null,
        verdict: event,
      };
  }
}

/** Replay a full message log into the final view. */
export function replayLog(events: ServerEvent[]): UiSessionView {
  return events.reduce((view, e) => applyEvent(view, e), initialView());
}

/** Update only the countdown from the local clock. */
export function tickCountdown(
  view: UiSessionView,
  deadlineMs: number,
  localMs: number,
): UiSessionView {
  if (view.activeAction === null) return view;
  return {
    ...view,
    countdownSeconds: Math.max(0, Math.ceil((deadlineMs - localMs) / 1000)),
  };
}
