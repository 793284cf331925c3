// Wire types of the personaforge HTTP API.

export type EventKind =
    | "session_started"
    | "typing_started"
    | "message"
    | "modality_hint"
    | "error";

export interface SessionEvent {
    kind: EventKind;
    payload: Record<string, unknown>;
    sequence: number;
    ts: number;
}

export interface ProfileCard {
    bundle_id: string;
    profile_label: string;
    description: string;
    avatar: string;
    font_scale: number;
    high_contrast: boolean;
}
