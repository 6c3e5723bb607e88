/** Client-side motion-profile math and edit operations.
 *
 * Mirrors the server's validation rules exactly so the editor can never
 * construct a profile the server would reject: keypoints stay sorted,
 * at most two share a timestamp (a step edge), u stays in [-1, 1], and
 * the duration never drops below 1 s.
 */

import type { KeypointDoc, ProfileDoc } from './types.js';

export const MIN_DURATION_S = 1.0;

export function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function cloneProfile(profile: ProfileDoc): ProfileDoc {
  return {
    name: profile.name,
    duration_s: profile.duration_s,
    continuous: profile.continuous,
    keypoints: profile.keypoints.map((kp) => ({ t: kp.t, u: kp.u })),
  };
}

/** Piecewise-linear evaluation; step edges are right-continuous. */
export function evaluateProfile(profile: ProfileDoc, t: number): number {
  if (!Number.isFinite(t) || t < 0) {
    throw new RangeError(`profile time must be finite and >= 0, got ${t}`);
  }
  const kps = profile.keypoints;
  let tt = t;
  if (profile.continuous) {
    tt = t % profile.duration_s;
  } else if (t > profile.duration_s) {
    return 0;
  }
  // Index of the first keypoint strictly after tt.
  let j = 0;
  while (j < kps.length && kps[j].t <= tt) j++;
  if (j === 0) return kps[0].u;
  if (j === kps.length) return kps[kps.length - 1].u;
  const a = kps[j - 1];
  const b = kps[j];
  return a.u + ((b.u - a.u) * (tt - a.t)) / (b.t - a.t);
}

function countAt(keypoints: KeypointDoc[], t: number): number {
  let n = 0;
  for (const kp of keypoints) {
    if (kp.t === t) n++;
  }
  return n;
}

/** First violated profile invariant, or null if the document is valid. */
export function validateProfile(profile: ProfileDoc): string | null {
  if (typeof profile.name !== 'string') return 'name must be a string';
  if (!Number.isFinite(profile.duration_s) || profile.duration_s <= 0) {
    return 'duration_s must be positive';
  }
  const kps = profile.keypoints;
  if (!Array.isArray(kps) || kps.length < 2) return 'profile needs at least 2 keypoints';
  let run = 1;
  for (let i = 0; i < kps.length; i++) {
    const kp = kps[i];
    if (!Number.isFinite(kp.t) || kp.t < 0) return `keypoints[${i}].t must be >= 0`;
    if (kp.t > profile.duration_s) return `keypoints[${i}].t is past the duration`;
    if (!Number.isFinite(kp.u) || kp.u < -1 || kp.u > 1) {
      return `keypoints[${i}].u must be in [-1, 1]`;
    }
    if (i > 0) {
      if (kp.t < kps[i - 1].t) return 'keypoints must be sorted by t';
      run = kp.t === kps[i - 1].t ? run + 1 : 1;
      if (run > 2) return `more than 2 keypoints at t=${kp.t}`;
    }
  }
  return null;
}

export type EditResult =
  | { ok: true; profile: ProfileDoc; dropped?: number }
  | { ok: false; reason: string };

/** Insert a keypoint (double-click on the graph). u clamps; a third
 * keypoint on an occupied timestamp is rejected. */
export function addKeypoint(profile: ProfileDoc, t: number, u: number): EditResult {
  if (!Number.isFinite(t) || t < 0 || t > profile.duration_s) {
    return { ok: false, reason: `keypoint time must be within [0, ${profile.duration_s}] s` };
  }
  if (countAt(profile.keypoints, t) >= 2) {
    return { ok: false, reason: `already 2 keypoints at t=${t} s` };
  }
  const next = cloneProfile(profile);
  let at = 0;
  while (at < next.keypoints.length && next.keypoints[at].t <= t) at++;
  next.keypoints.splice(at, 0, { t, u: clamp(u, -1, 1) });
  return { ok: true, profile: next };
}

/** Drag a keypoint. t and u clamp to the graph bounds; the move is
 * rejected if it would pile 3 keypoints onto one timestamp. */
export function moveKeypoint(profile: ProfileDoc, index: number, t: number, u: number): EditResult {
  if (!Number.isInteger(index) || index < 0 || index >= profile.keypoints.length) {
    return { ok: false, reason: `no keypoint at index ${index}` };
  }
  const clampedT = clamp(t, 0, profile.duration_s);
  const next = cloneProfile(profile);
  next.keypoints[index] = { t: clampedT, u: clamp(u, -1, 1) };
  next.keypoints.sort((a, b) => a.t - b.t); // stable: coincident pairs keep order
  if (countAt(next.keypoints, clampedT) > 2) {
    return { ok: false, reason: `already 2 keypoints at t=${clampedT} s` };
  }
  return { ok: true, profile: next };
}

/** The +/- duration buttons: exactly 1 s at a time, never below 1 s.
 * Shrinking drops keypoints past the new end and, if fewer than 2 would
 * remain, pins a boundary keypoint at the profile's sampled value. */
export function adjustDuration(profile: ProfileDoc, delta: number): EditResult {
  if (delta !== 1 && delta !== -1) {
    return { ok: false, reason: 'duration changes by exactly 1 s at a time' };
  }
  const next = profile.duration_s + delta;
  if (next < MIN_DURATION_S) {
    return { ok: false, reason: `duration must stay >= ${MIN_DURATION_S} s` };
  }
  const kept = profile.keypoints.filter((kp) => kp.t <= next).map((kp) => ({ t: kp.t, u: kp.u }));
  const dropped = profile.keypoints.length - kept.length;
  if (kept.length < 2) {
    kept.push({ t: next, u: evaluateProfile(profile, next) });
  }
  return {
    ok: true,
    profile: { name: profile.name, duration_s: next, continuous: profile.continuous, keypoints: kept },
    dropped,
  };
}

export function setContinuous(profile: ProfileDoc, value: boolean): ProfileDoc {
  const next = cloneProfile(profile);
  next.continuous = value;
  return next;
}

/** Canonical JSON body for PUT /api/profiles/{tag} (stable field order). */
export function putPayload(profile: ProfileDoc): string {
  return JSON.stringify({
    name: profile.name,
    duration_s: profile.duration_s,
    continuous: profile.continuous,
    keypoints: profile.keypoints.map((kp) => ({ t: kp.t, u: kp.u })),
  });
}
