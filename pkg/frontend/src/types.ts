/** JSON shapes shared with the control server's HTTP/WebSocket API. */

export interface KeypointDoc {
  /** Time [s] from the start of the profile. */
  t: number;
  /** Drive level in [-1, 1]. */
  u: number;
}

export interface ProfileDoc {
  name: string;
  duration_s: number;
  continuous: boolean;
  keypoints: KeypointDoc[];
}

export interface ObjectInfo {
  tag_id: string;
  name: string;
  category: string;
  pose: [number, number, number];
}

/** One telemetry tick from a live test session. */
export interface Telemetry {
  t: number;
  u: number;
  motor_theta: number;
  output_coord: number;
  load: number;
  completed: boolean;
}

export interface SessionSummary {
  session_id: string;
  state: string;
  completed: boolean;
  t_complete: number | null;
  t_end: number;
  fault: string | null;
}
