/** The editor's single state reducer.
 *
 * Every state change — edits, session lifecycle, telemetry ticks — flows
 * through reduce(), which is pure: replaying a recorded action log from
 * the initial state reproduces the exact editor state and PUT payload.
 * DOM rendering reads the state; it never mutates it.
 */

import {
  addKeypoint,
  adjustDuration,
  cloneProfile,
  moveKeypoint,
  putPayload,
  setContinuous,
  type EditResult,
} from './profile.js';
import type { ProfileDoc, SessionSummary, Telemetry } from './types.js';

export interface SessionView {
  id: string;
  running: boolean;
}

export interface EditorState {
  selectedTag: string | null;
  profile: ProfileDoc | null;
  /** Undo snapshots, oldest first. */
  past: ProfileDoc[];
  dirty: boolean;
  /** Last rejection/warning/info message for the status line. */
  notice: string | null;
  session: SessionView | null;
  summary: SessionSummary | null;
  telemetry: Telemetry | null;
  /** Sim time of the first completed telemetry sample; latches once per session. */
  completedAt: number | null;
}

export type EditorAction =
  | { type: 'select_object'; tag: string }
  | { type: 'load_profile'; profile: ProfileDoc }
  | { type: 'add_keypoint'; t: number; u: number }
  | { type: 'move_keypoint'; index: number; t: number; u: number }
  | { type: 'adjust_duration'; delta: 1 | -1 }
  | { type: 'set_continuous'; value: boolean }
  | { type: 'undo' }
  | { type: 'mark_saved' }
  | { type: 'notice'; message: string }
  | { type: 'session_started'; id: string }
  | { type: 'telemetry'; sample: Telemetry }
  | { type: 'session_stopped'; summary: SessionSummary };

export const initialState: EditorState = {
  selectedTag: null,
  profile: null,
  past: [],
  dirty: false,
  notice: null,
  session: null,
  summary: null,
  telemetry: null,
  completedAt: null,
};

const UNDO_DEPTH = 50;

function applyEdit(state: EditorState, result: EditResult, dropNote = false): EditorState {
  if (!result.ok) {
    return { ...state, notice: result.reason };
  }
  if (state.profile === null) return state;
  const past = [...state.past, state.profile].slice(-UNDO_DEPTH);
  const notice =
    dropNote && result.dropped ? `dropped ${result.dropped} keypoint(s) past the new end` : null;
  return { ...state, profile: result.profile, past, dirty: true, notice };
}

export function reduce(state: EditorState, action: EditorAction): EditorState {
  switch (action.type) {
    case 'select_object':
      return { ...state, selectedTag: action.tag, notice: null };

    case 'load_profile':
      return {
        ...state,
        profile: cloneProfile(action.profile),
        past: [],
        dirty: false,
        notice: null,
      };

    case 'add_keypoint':
      if (state.profile === null) return { ...state, notice: 'no profile loaded' };
      return applyEdit(state, addKeypoint(state.profile, action.t, action.u));

    case 'move_keypoint':
      if (state.profile === null) return { ...state, notice: 'no profile loaded' };
      return applyEdit(state, moveKeypoint(state.profile, action.index, action.t, action.u));

    case 'adjust_duration':
      if (state.profile === null) return { ...state, notice: 'no profile loaded' };
      return applyEdit(state, adjustDuration(state.profile, action.delta), true);

    case 'set_continuous':
      if (state.profile === null) return { ...state, notice: 'no profile loaded' };
      return applyEdit(state, { ok: true, profile: setContinuous(state.profile, action.value) });

    case 'undo': {
      if (state.past.length === 0) return { ...state, notice: 'nothing to undo' };
      const past = state.past.slice(0, -1);
      const profile = state.past[state.past.length - 1];
      return { ...state, profile, past, dirty: true, notice: null };
    }

    case 'mark_saved':
      return { ...state, dirty: false, notice: 'saved' };

    case 'notice':
      return { ...state, notice: action.message };

    case 'session_started':
      return {
        ...state,
        session: { id: action.id, running: true },
        summary: null,
        telemetry: null,
        completedAt: null,
        notice: null,
      };

    case 'telemetry': {
      const completedAt =
        state.completedAt !== null
          ? state.completedAt
          : action.sample.completed
            ? action.sample.t
            : null;
      return { ...state, telemetry: action.sample, completedAt };
    }

    case 'session_stopped':
      return {
        ...state,
        session: state.session ? { ...state.session, running: false } : null,
        summary: action.summary,
      };
  }
}

export function replay(actions: EditorAction[], start: EditorState = initialState): EditorState {
  let state = start;
  for (const action of actions) {
    state = reduce(state, action);
  }
  return state;
}

/** The body the save button PUTs, or null when nothing is loaded. */
export function savePayload(state: EditorState): string | null {
  return state.profile === null ? null : putPayload(state.profile);
}
