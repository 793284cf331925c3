// Pure transcript state: a fold over the server's event sequence.
//
// Everything the user sees on the agent side of the conversation is derived
// here, with no other inputs, so replaying a recorded event sequence yields
// exactly the transcript of the live run. Events at or below
// lastSeenSequence are ignored, which makes reconnect resumes idempotent.

import { SessionEvent } from "./types.js";

export interface SpeechParams {
    voiceStyle: string;
    voiceSpeed: number;
}

export interface TranscriptEntry {
    kind: "agent" | "error";
    text: string;
    sequence: number;
    speech?: SpeechParams;
}

export interface TranscriptState {
    profileLabel: string;
    entries: TranscriptEntry[];
    typing: boolean;
    typingDurationMs: number;
    lastSeenSequence: number;
}

export function emptyTranscript(): TranscriptState {
    return {
        profileLabel: "",
        entries: [],
        typing: false,
        typingDurationMs: 0,
        lastSeenSequence: 0,
    };
}

export function applyEvent(state: TranscriptState, event: SessionEvent): TranscriptState {
    if (event.sequence <= state.lastSeenSequence) {
        return state; // duplicate delivery (reconnect replay)
    }
    const next: TranscriptState = {
        ...state,
        entries: [...state.entries],
        lastSeenSequence: event.sequence,
    };
    switch (event.kind) {
        case "session_started":
            next.profileLabel = String(event.payload["profile_label"] ?? "");
            break;
        case "typing_started":
            next.typing = true;
            next.typingDurationMs = Number(event.payload["duration_ms"] ?? 0);
            break;
        case "message":
            next.entries.push({
                kind: "agent",
                text: String(event.payload["text"] ?? ""),
                sequence: event.sequence,
            });
            next.typing = false;
            break;
        case "modality_hint": {
            const last = next.entries[next.entries.length - 1];
            if (last && last.kind === "agent" && event.payload["channel"] === "speech") {
                next.entries[next.entries.length - 1] = {
                    ...last,
                    speech: {
                        voiceStyle: String(event.payload["voice_style"] ?? "default"),
                        voiceSpeed: Number(event.payload["voice_speed"] ?? 1.0),
                    },
                };
            }
            break;
        }
        case "error":
            next.entries.push({
                kind: "error",
                text: String(event.payload["message"] ?? "something went wrong"),
                sequence: event.sequence,
            });
            next.typing = false;
            break;
    }
    return next;
}

export function applyEvents(state: TranscriptState, events: SessionEvent[]): TranscriptState {
    let current = state;
    for (const event of events) {
        current = applyEvent(current, event);
    }
    return current;
}
