/** Graph geometry: mapping between profile coordinates (t in seconds,
 * u in [-1, 1]) and canvas pixels, keypoint hit-testing, and the
 * telemetry cursor position. Pure math, testable without a canvas.
 */

import { clamp } from './profile.js';
import type { ProfileDoc } from './types.js';

export interface GraphBox {
  left: number;
  top: number;
  width: number;
  height: number;
}

export function timeToX(box: GraphBox, duration: number, t: number): number {
  return box.left + (t / duration) * box.width;
}

export function xToTime(box: GraphBox, duration: number, x: number): number {
  return clamp(((x - box.left) / box.width) * duration, 0, duration);
}

export function uToY(box: GraphBox, u: number): number {
  return box.top + ((1 - u) / 2) * box.height;
}

export function yToU(box: GraphBox, y: number): number {
  return clamp(1 - (2 * (y - box.top)) / box.height, -1, 1);
}

/** Keypoints as pixel vertices; coincident timestamps draw the step edge. */
export function profilePolyline(box: GraphBox, profile: ProfileDoc): Array<[number, number]> {
  return profile.keypoints.map((kp) => [
    timeToX(box, profile.duration_s, kp.t),
    uToY(box, kp.u),
  ]);
}

/** Index of the closest keypoint within radius pixels, or null. */
export function hitKeypoint(
  box: GraphBox,
  profile: ProfileDoc,
  x: number,
  y: number,
  radius: number,
): number | null {
  let best: number | null = null;
  let bestDist = radius * radius;
  profile.keypoints.forEach((kp, index) => {
    const dx = timeToX(box, profile.duration_s, kp.t) - x;
    const dy = uToY(box, kp.u) - y;
    const dist = dx * dx + dy * dy;
    if (dist <= bestDist) {
      best = index;
      bestDist = dist;
    }
  });
  return best;
}

/** Where the telemetry cursor sits on the time axis: continuous profiles
 * wrap, finite ones park at the end. */
export function cursorTime(profile: ProfileDoc, t: number): number {
  if (profile.continuous) return t % profile.duration_s;
  return Math.min(t, profile.duration_s);
}
