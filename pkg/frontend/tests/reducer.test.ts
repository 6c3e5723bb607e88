import { describe, expect, test } from 'vitest';

import { evaluateProfile, validateProfile } from '../src/profile.js';
import {
  initialState,
  reduce,
  replay,
  savePayload,
  type EditorAction,
  type EditorState,
} from '../src/reducer.js';
import type { ProfileDoc, Telemetry } from '../src/types.js';

// The server's one_way template, as /api/templates returns it.
const ONE_WAY: ProfileDoc = {
  name: 'one_way',
  duration_s: 4,
  continuous: false,
  keypoints: [
    { t: 0, u: 1 },
    { t: 2, u: 1 },
    { t: 2, u: 0 },
    { t: 4, u: 0 },
  ],
};

function loaded(): EditorState {
  return replay([
    { type: 'select_object', tag: '1a2b3c01' },
    { type: 'load_profile', profile: ONE_WAY },
  ]);
}

function sample(t: number, completed = false): Telemetry {
  return { t, u: 0.5, motor_theta: t, output_coord: t / 10, load: 1, completed };
}

describe('action log replay', () => {
  // The canonical authoring session: load template, double-click a point,
  // drag it, grow the duration, save.
  const log: EditorAction[] = [
    { type: 'select_object', tag: '1a2b3c01' },
    { type: 'load_profile', profile: ONE_WAY },
    { type: 'add_keypoint', t: 1, u: 0.5 },
    { type: 'move_keypoint', index: 1, t: 1.25, u: 0.75 },
    { type: 'adjust_duration', delta: 1 },
    { type: 'mark_saved' },
  ];

  test('replay reproduces identical state and PUT payload', () => {
    const first = replay(log);
    const second = replay(log);
    expect(second).toEqual(first);
    expect(savePayload(second)).toBe(savePayload(first));
    expect(savePayload(first)).not.toBeNull();
  });

  test('a serialized recording replays to the same result', () => {
    const recorded = JSON.parse(JSON.stringify(log)) as EditorAction[];
    expect(replay(recorded)).toEqual(replay(log));
    expect(savePayload(replay(recorded))).toBe(savePayload(replay(log)));
  });

  test('the replayed profile reflects every edit', () => {
    const state = replay(log);
    expect(state.profile?.duration_s).toBe(5);
    expect(state.profile?.keypoints[1]).toEqual({ t: 1.25, u: 0.75 });
    expect(state.dirty).toBe(false); // saved at the end
  });
});

describe('edit rules', () => {
  test('add then undo restores the prior profile', () => {
    const before = loaded();
    const added = reduce(before, { type: 'add_keypoint', t: 3, u: -0.25 });
    expect(added.profile?.keypoints.length).toBe(5);
    const undone = reduce(added, { type: 'undo' });
    expect(undone.profile).toEqual(before.profile);
  });

  test('drag beyond the bounds clamps', () => {
    const state = reduce(loaded(), { type: 'move_keypoint', index: 0, t: -3, u: 7 });
    expect(state.profile?.keypoints[0]).toEqual({ t: 0, u: 1 });
    const low = reduce(loaded(), { type: 'move_keypoint', index: 3, t: 99, u: -9 });
    expect(low.profile?.keypoints[3]).toEqual({ t: 4, u: -1 });
  });

  test('a third keypoint on an occupied timestamp is rejected', () => {
    const state = reduce(loaded(), { type: 'add_keypoint', t: 2, u: 0.5 });
    expect(state.profile).toEqual(ONE_WAY);
    expect(state.notice).toContain('already 2 keypoints');
  });

  test('plus then minus restores the duration and keypoints', () => {
    const grown = reduce(loaded(), { type: 'adjust_duration', delta: 1 });
    expect(grown.profile?.duration_s).toBe(5);
    const back = reduce(grown, { type: 'adjust_duration', delta: -1 });
    expect(back.profile).toEqual(ONE_WAY);
  });

  test('duration never drops below 1 s', () => {
    let state = loaded();
    for (let i = 0; i < 3; i++) state = reduce(state, { type: 'adjust_duration', delta: -1 });
    expect(state.profile?.duration_s).toBe(1);
    const rejected = reduce(state, { type: 'adjust_duration', delta: -1 });
    expect(rejected.profile?.duration_s).toBe(1);
    expect(rejected.notice).toContain('>= 1');
  });

  test('shrinking warns with the number of dropped keypoints', () => {
    const state = reduce(loaded(), { type: 'adjust_duration', delta: -1 });
    expect(state.profile?.duration_s).toBe(3);
    expect(state.profile?.keypoints.length).toBe(3); // the t=4 point fell off
    expect(state.notice).toContain('dropped 1 keypoint');
  });

  test('shrinking below 2 keypoints pins a boundary point', () => {
    const flat: ProfileDoc = {
      name: 'flat',
      duration_s: 2,
      continuous: false,
      keypoints: [
        { t: 0, u: 0.5 },
        { t: 2, u: 0.5 },
      ],
    };
    const state = replay([
      { type: 'load_profile', profile: flat },
      { type: 'adjust_duration', delta: -1 },
    ]);
    expect(state.profile?.keypoints).toEqual([
      { t: 0, u: 0.5 },
      { t: 1, u: evaluateProfile(flat, 1) },
    ]);
  });

  test('continuous toggle is undoable and marks dirty', () => {
    const toggled = reduce(loaded(), { type: 'set_continuous', value: true });
    expect(toggled.profile?.continuous).toBe(true);
    expect(toggled.dirty).toBe(true);
    expect(reduce(toggled, { type: 'undo' }).profile?.continuous).toBe(false);
  });
});

describe('reducer never produces an invalid profile', () => {
  // Small deterministic PRNG so the property run is reproducible.
  function mulberry32(seed: number): () => number {
    return () => {
      seed |= 0;
      seed = (seed + 0x6d2b79f5) | 0;
      let t = Math.imul(seed ^ (seed >>> 15), 1 | seed);
      t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
      return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
    };
  }

  test('500 random edit actions keep every invariant', () => {
    const rand = mulberry32(20260822);
    let state = loaded();
    for (let i = 0; i < 500; i++) {
      const roll = rand();
      const duration = state.profile?.duration_s ?? 4;
      let action: EditorAction;
      if (roll < 0.35) {
        action = { type: 'add_keypoint', t: rand() * duration * 1.2, u: rand() * 4 - 2 };
      } else if (roll < 0.7) {
        const count = state.profile?.keypoints.length ?? 1;
        action = {
          type: 'move_keypoint',
          index: Math.floor(rand() * count),
          t: rand() * duration * 1.4 - 0.2,
          u: rand() * 4 - 2,
        };
      } else if (roll < 0.85) {
        action = { type: 'adjust_duration', delta: rand() < 0.5 ? 1 : -1 };
      } else if (roll < 0.95) {
        action = { type: 'undo' };
      } else {
        action = { type: 'set_continuous', value: rand() < 0.5 };
      }
      state = reduce(state, action);
      expect(state.profile).not.toBeNull();
      expect(validateProfile(state.profile!)).toBeNull();
    }
  });
});

describe('session and telemetry state', () => {
  test('completion latches exactly once', () => {
    let state = reduce(loaded(), { type: 'session_started', id: 's0001' });
    expect(state.completedAt).toBeNull();
    state = reduce(state, { type: 'telemetry', sample: sample(0.02) });
    state = reduce(state, { type: 'telemetry', sample: sample(0.04, true) });
    expect(state.completedAt).toBe(0.04);
    state = reduce(state, { type: 'telemetry', sample: sample(0.06, true) });
    state = reduce(state, { type: 'telemetry', sample: sample(0.08, false) });
    expect(state.completedAt).toBe(0.04); // latched, never moves
  });

  test('a new session clears the badge and telemetry', () => {
    let state = reduce(loaded(), { type: 'session_started', id: 's0001' });
    state = reduce(state, { type: 'telemetry', sample: sample(1, true) });
    state = reduce(state, { type: 'session_started', id: 's0002' });
    expect(state.completedAt).toBeNull();
    expect(state.telemetry).toBeNull();
    expect(state.session).toEqual({ id: 's0002', running: true });
  });

  test('stop keeps the summary for the outcome readout', () => {
    let state = reduce(loaded(), { type: 'session_started', id: 's0001' });
    state = reduce(state, {
      type: 'session_stopped',
      summary: {
        session_id: 's0001',
        state: 'Stopped',
        completed: true,
        t_complete: 0.46,
        t_end: 1.0,
        fault: null,
      },
    });
    expect(state.session?.running).toBe(false);
    expect(state.summary?.completed).toBe(true);
  });

  test('editing with no profile loaded only posts a notice', () => {
    const state = reduce(initialState, { type: 'add_keypoint', t: 1, u: 0 });
    expect(state).toEqual({ ...initialState, notice: 'no profile loaded' });
  });
});
