/** DOM wiring for the editor page. All state lives in the reducer;
 * this file renders it and translates browser events into actions.
 */

import { ApiClient, ApiError } from './api.js';
import { cursorTime, hitKeypoint, profilePolyline, timeToX, uToY, xToTime, yToU, type GraphBox } from './geometry.js';
import { validateProfile } from './profile.js';
import { initialState, reduce, savePayload, type EditorAction, type EditorState } from './reducer.js';
import { TelemetryStream } from './stream.js';
import type { ProfileDoc } from './types.js';

const api = new ApiClient(
  new URLSearchParams(location.search).get('api') ?? 'http://127.0.0.1:7070',
);

const canvas = document.getElementById('graph') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const objectSelect = document.getElementById('object-select') as HTMLSelectElement;
const templateSelect = document.getElementById('template-select') as HTMLSelectElement;
const durationLabel = document.getElementById('duration-label')!;
const continuousBox = document.getElementById('continuous') as HTMLInputElement;
const saveButton = document.getElementById('save') as HTMLButtonElement;
const undoButton = document.getElementById('undo') as HTMLButtonElement;
const startButton = document.getElementById('start') as HTMLButtonElement;
const stopButton = document.getElementById('stop') as HTMLButtonElement;
const badge = document.getElementById('badge')!;
const readout = document.getElementById('readout')!;
const noticeLine = document.getElementById('notice')!;

const BOX: GraphBox = { left: 44, top: 12, width: canvas.width - 56, height: canvas.height - 42 };
const HIT_RADIUS = 9;

let state: EditorState = initialState;
let templates: ProfileDoc[] = [];
let stream: TelemetryStream | null = null;
let dragIndex: number | null = null;

const EDIT_ACTIONS = new Set(['add_keypoint', 'move_keypoint', 'adjust_duration', 'set_continuous', 'undo']);

function dispatch(action: EditorAction): void {
  const before = state.profile;
  state = reduce(state, action);
  // Live sessions pick up edits at their next tick.
  if (EDIT_ACTIONS.has(action.type) && state.profile !== before && state.profile !== null
      && state.session?.running && stream !== null) {
    stream.updateProfile(state.profile);
  }
  render();
}

// --- rendering ---------------------------------------------------------------

function drawGraph(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = '#fafafa';
  ctx.fillRect(BOX.left, BOX.top, BOX.width, BOX.height);
  const profile = state.profile;
  if (profile === null) return;

  // Grid: u = -1, 0, 1 and whole seconds.
  ctx.strokeStyle = '#ddd';
  ctx.fillStyle = '#666';
  ctx.font = '11px sans-serif';
  ctx.lineWidth = 1;
  for (const u of [-1, 0, 1]) {
    const y = uToY(BOX, u);
    ctx.beginPath();
    ctx.moveTo(BOX.left, y);
    ctx.lineTo(BOX.left + BOX.width, y);
    ctx.stroke();
    ctx.fillText(`u=${u}`, 6, y + 4);
  }
  for (let s = 0; s <= profile.duration_s; s++) {
    const x = timeToX(BOX, profile.duration_s, s);
    ctx.beginPath();
    ctx.moveTo(x, BOX.top);
    ctx.lineTo(x, BOX.top + BOX.height);
    ctx.stroke();
    ctx.fillText(`${s}s`, x - 6, BOX.top + BOX.height + 16);
  }

  // The signal itself.
  const points = profilePolyline(BOX, profile);
  ctx.strokeStyle = '#0b62c4';
  ctx.lineWidth = 2;
  ctx.beginPath();
  points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.stroke();
  points.forEach(([x, y], i) => {
    ctx.fillStyle = i === dragIndex ? '#d33' : '#0b62c4';
    ctx.beginPath();
    ctx.arc(x, y, 4.5, 0, 2 * Math.PI);
    ctx.fill();
  });

  // Telemetry cursor.
  if (state.telemetry !== null && state.session !== null) {
    const x = timeToX(BOX, profile.duration_s, cursorTime(profile, state.telemetry.t));
    ctx.strokeStyle = state.completedAt !== null ? '#2a9d2a' : '#e08a00';
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x, BOX.top);
    ctx.lineTo(x, BOX.top + BOX.height);
    ctx.stroke();
  }
}

function render(): void {
  drawGraph();
  const profile = state.profile;
  durationLabel.textContent = profile ? `${profile.duration_s} s` : '—';
  continuousBox.checked = profile?.continuous ?? false;
  saveButton.disabled = profile === null || state.selectedTag === null || !state.dirty;
  undoButton.disabled = state.past.length === 0;
  startButton.disabled = profile === null || state.selectedTag === null || !!state.session?.running;
  stopButton.disabled = !state.session?.running;
  badge.textContent = state.completedAt !== null ? `completed at ${state.completedAt.toFixed(2)} s` : '';
  badge.className = state.completedAt !== null ? 'badge done' : 'badge';
  if (state.telemetry !== null) {
    const m = state.telemetry;
    readout.textContent =
      `t=${m.t.toFixed(2)} s  u=${m.u.toFixed(2)}  output=${m.output_coord.toFixed(4)}  load=${m.load.toFixed(2)}`;
  } else if (state.summary !== null) {
    const s = state.summary;
    readout.textContent = `session ${s.session_id} ${s.state.toLowerCase()}: ` +
      (s.completed ? `completed at ${s.t_complete?.toFixed(2)} s` : 'not completed') +
      (s.fault ? ` (fault: ${s.fault})` : '');
  } else {
    readout.textContent = '';
  }
  noticeLine.textContent = state.notice ?? '';
}

// --- pointer editing ----------------------------------------------------------

function canvasPoint(event: MouseEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((event.clientX - rect.left) * canvas.width) / rect.width,
    y: ((event.clientY - rect.top) * canvas.height) / rect.height,
  };
}

canvas.addEventListener('pointerdown', (event) => {
  if (state.profile === null) return;
  const { x, y } = canvasPoint(event);
  dragIndex = hitKeypoint(BOX, state.profile, x, y, HIT_RADIUS);
  if (dragIndex !== null) canvas.setPointerCapture(event.pointerId);
  render();
});

canvas.addEventListener('pointermove', (event) => {
  if (dragIndex === null || state.profile === null) return;
  const { x, y } = canvasPoint(event);
  dispatch({
    type: 'move_keypoint',
    index: dragIndex,
    t: xToTime(BOX, state.profile.duration_s, x),
    u: yToU(BOX, y),
  });
});

canvas.addEventListener('pointerup', () => {
  dragIndex = null;
  render();
});

canvas.addEventListener('dblclick', (event) => {
  if (state.profile === null) return;
  const { x, y } = canvasPoint(event);
  dispatch({
    type: 'add_keypoint',
    t: xToTime(BOX, state.profile.duration_s, x),
    u: yToU(BOX, y),
  });
});

// --- controls ------------------------------------------------------------------

document.getElementById('duration-minus')!.addEventListener('click', () =>
  dispatch({ type: 'adjust_duration', delta: -1 }),
);
document.getElementById('duration-plus')!.addEventListener('click', () =>
  dispatch({ type: 'adjust_duration', delta: 1 }),
);
continuousBox.addEventListener('change', () =>
  dispatch({ type: 'set_continuous', value: continuousBox.checked }),
);
undoButton.addEventListener('click', () => dispatch({ type: 'undo' }));

templateSelect.addEventListener('change', () => {
  const template = templates.find((t) => t.name === templateSelect.value);
  if (template) dispatch({ type: 'load_profile', profile: template });
});

objectSelect.addEventListener('change', async () => {
  const tag = objectSelect.value;
  dispatch({ type: 'select_object', tag });
  try {
    const saved = await api.profile(tag);
    dispatch({ type: 'load_profile', profile: saved });
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      dispatch({ type: 'notice', message: 'no saved profile for this object yet' });
    } else {
      dispatch({ type: 'notice', message: String(error) });
    }
  }
});

saveButton.addEventListener('click', async () => {
  const body = savePayload(state);
  if (body === null || state.selectedTag === null || state.profile === null) return;
  const violation = validateProfile(state.profile);
  if (violation !== null) {
    dispatch({ type: 'notice', message: violation });
    return;
  }
  try {
    await api.saveProfile(state.selectedTag, JSON.parse(body) as ProfileDoc);
    dispatch({ type: 'mark_saved' });
  } catch (error) {
    dispatch({ type: 'notice', message: error instanceof ApiError ? error.message : String(error) });
  }
});

startButton.addEventListener('click', async () => {
  if (state.profile === null || state.selectedTag === null) return;
  try {
    const { session_id } = await api.startTest(state.selectedTag, state.profile, state.profile.continuous);
    dispatch({ type: 'session_started', id: session_id });
    stream = new TelemetryStream(api.streamUrl(session_id), (event) => {
      if (event.kind === 'telemetry') dispatch({ type: 'telemetry', sample: event.sample });
      else if (event.kind === 'server_error') dispatch({ type: 'notice', message: event.detail });
    });
  } catch (error) {
    dispatch({ type: 'notice', message: error instanceof ApiError ? error.message : String(error) });
  }
});

stopButton.addEventListener('click', async () => {
  if (!state.session) return;
  try {
    const summary = await api.stopTest(state.session.id);
    dispatch({ type: 'session_stopped', summary });
  } catch (error) {
    dispatch({ type: 'notice', message: error instanceof ApiError ? error.message : String(error) });
  }
  stream?.close();
  stream = null;
});

// --- boot ----------------------------------------------------------------------

async function boot(): Promise<void> {
  try {
    const [objects, templateDocs] = await Promise.all([api.objects(), api.templates()]);
    templates = templateDocs;
    for (const obj of objects) {
      const option = document.createElement('option');
      option.value = obj.tag_id;
      option.textContent = `${obj.name} (${obj.category})`;
      objectSelect.append(option);
    }
    for (const template of templates) {
      const option = document.createElement('option');
      option.value = template.name;
      option.textContent = template.name.replaceAll('_', ' ');
      templateSelect.append(option);
    }
    if (objects.length > 0) {
      objectSelect.value = objects[0].tag_id;
      dispatch({ type: 'select_object', tag: objects[0].tag_id });
    }
    if (templates.length > 0) {
      templateSelect.value = templates[0].name;
      dispatch({ type: 'load_profile', profile: templates[0] });
    }
  } catch (error) {
    dispatch({ type: 'notice', message: `cannot reach server at ${api.baseUrl}: ${String(error)}` });
  }
  render();
}

void boot();
