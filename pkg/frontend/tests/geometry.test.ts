import { describe, expect, test } from 'vitest';

import {
  cursorTime,
  hitKeypoint,
  profilePolyline,
  timeToX,
  uToY,
  xToTime,
  yToU,
  type GraphBox,
} from '../src/geometry.js';
import type { ProfileDoc } from '../src/types.js';

const BOX: GraphBox = { left: 40, top: 10, width: 700, height: 280 };

const PROFILE: ProfileDoc = {
  name: 'demo',
  duration_s: 4,
  continuous: false,
  keypoints: [
    { t: 0, u: 1 },
    { t: 2, u: 1 },
    { t: 2, u: 0 },
    { t: 4, u: 0 },
  ],
};

describe('coordinate mapping', () => {
  test('time axis round trips across the box', () => {
    for (const t of [0, 0.5, 1.7, 3.99, 4]) {
      expect(xToTime(BOX, 4, timeToX(BOX, 4, t))).toBeCloseTo(t, 10);
    }
    expect(timeToX(BOX, 4, 0)).toBe(BOX.left);
    expect(timeToX(BOX, 4, 4)).toBe(BOX.left + BOX.width);
  });

  test('u axis round trips and is oriented up', () => {
    for (const u of [-1, -0.25, 0, 0.6, 1]) {
      expect(yToU(BOX, uToY(BOX, u))).toBeCloseTo(u, 10);
    }
    expect(uToY(BOX, 1)).toBe(BOX.top); // +1 at the top
    expect(uToY(BOX, -1)).toBe(BOX.top + BOX.height);
    expect(uToY(BOX, 0)).toBe(BOX.top + BOX.height / 2);
  });

  test('pixel-to-profile conversions clamp to the graph bounds', () => {
    expect(xToTime(BOX, 4, BOX.left - 100)).toBe(0);
    expect(xToTime(BOX, 4, BOX.left + BOX.width + 100)).toBe(4);
    expect(yToU(BOX, -999)).toBe(1);
    expect(yToU(BOX, 9999)).toBe(-1);
  });
});

describe('polyline and hit testing', () => {
  test('polyline has one vertex per keypoint, step edges vertical', () => {
    const points = profilePolyline(BOX, PROFILE);
    expect(points.length).toBe(4);
    expect(points[1][0]).toBe(points[2][0]); // t=2 pair shares an x
    expect(points[1][1]).not.toBe(points[2][1]);
  });

  test('clicking on a keypoint finds it, clicking far away finds nothing', () => {
    const [x, y] = profilePolyline(BOX, PROFILE)[2];
    expect(hitKeypoint(BOX, PROFILE, x + 3, y - 2, 9)).toBe(2);
    expect(hitKeypoint(BOX, PROFILE, x + 50, y + 50, 9)).toBeNull();
  });

  test('the nearest of several candidates wins', () => {
    const [x1, y1] = profilePolyline(BOX, PROFILE)[1];
    expect(hitKeypoint(BOX, PROFILE, x1 + 1, y1 - 1, 200)).toBe(1);
  });
});

describe('telemetry cursor', () => {
  test('finite profiles park the cursor at the end', () => {
    expect(cursorTime(PROFILE, 2.5)).toBe(2.5);
    expect(cursorTime(PROFILE, 99)).toBe(4);
  });

  test('continuous profiles wrap', () => {
    const endless = { ...PROFILE, continuous: true, duration_s: 5 };
    expect(cursorTime(endless, 7.2)).toBeCloseTo(2.2, 10);
    expect(cursorTime(endless, 4.9)).toBeCloseTo(4.9, 10);
  });
});
