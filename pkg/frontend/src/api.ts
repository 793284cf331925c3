// Thin client for the personaforge JSON API.

import { ProfileCard, SessionEvent } from "./types.js";

export class ApiError extends Error {
    constructor(public status: number, message: string) {
        super(message);
    }
}

async function asJson(response: Response): Promise<any> {
    if (!response.ok) {
        let detail = response.statusText;
        try {
            detail = (await response.json()).error ?? detail;
        } catch {
            // not JSON, keep the status text
        }
        throw new ApiError(response.status, detail);
    }
    return response.json();
}

export async function fetchProfiles(): Promise<ProfileCard[]> {
    const data = await asJson(await fetch("/api/profiles"));
    return data.profiles as ProfileCard[];
}

export async function createSession(bundleId: string): Promise<string> {
    const data = await asJson(
        await fetch("/api/sessions", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ bundle_id: bundleId }),
        }),
    );
    return data.session_id as string;
}

export async function postMessage(sessionId: string, text: string): Promise<void> {
    await asJson(
        await fetch(`/api/sessions/${encodeURIComponent(sessionId)}/messages`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ text }),
        }),
    );
}

export async function pollEvents(
    sessionId: string,
    after: number,
    waitSecs: number,
): Promise<SessionEvent[]> {
    const params = new URLSearchParams({ after: String(after), wait: String(waitSecs) });
    const data = await asJson(
        await fetch(`/api/sessions/${encodeURIComponent(sessionId)}/events?${params}`),
    );
    return data.events as SessionEvent[];
}
