/** Thin fetch client for the control server's REST endpoints. */

import type { ObjectInfo, ProfileDoc, SessionSummary } from './types.js';

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export class ApiClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (response.status === 204) return undefined as T;
    const body: unknown = await response.json().catch(() => null);
    if (!response.ok) {
      const detail =
        body && typeof body === 'object' && 'detail' in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(detail, response.status);
    }
    return body as T;
  }

  objects(): Promise<ObjectInfo[]> {
    return this.request('/api/objects');
  }

  templates(): Promise<ProfileDoc[]> {
    return this.request('/api/templates');
  }

  profile(tag: string): Promise<ProfileDoc> {
    return this.request(`/api/profiles/${tag}`);
  }

  saveProfile(tag: string, profile: ProfileDoc): Promise<void> {
    return this.request(`/api/profiles/${tag}`, {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(profile),
    });
  }

  startTest(tag: string, profile: ProfileDoc, continuous: boolean): Promise<{ session_id: string }> {
    return this.request('/api/test/start', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ tag_id: tag, profile, continuous }),
    });
  }

  stopTest(sessionId: string): Promise<SessionSummary> {
    return this.request('/api/test/stop', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ session_id: sessionId }),
    });
  }

  streamUrl(sessionId: string): string {
    return `${this.baseUrl.replace(/^http/, 'ws')}/api/test/${sessionId}/stream`;
  }
}
