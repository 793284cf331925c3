// Profile picker and chat view, wired to the personaforge service.
//
// All personalization visible here comes from server data: profile cards
// carry the text style, and every agent bubble is rendered verbatim from a
// message event via the pure transcript fold. The client only adds the
// user's own bubbles and the typing/speech presentation.

import { ApiError, createSession, fetchProfiles, pollEvents, postMessage } from "./api.js";
import { speak, speechSupported } from "./speech.js";
import {
    TranscriptEntry,
    TranscriptState,
    applyEvents,
    emptyTranscript,
} from "./transcript.js";
import { ProfileCard } from "./types.js";

const POLL_WAIT_SECS = 25;
const RETRY_DELAY_MS = 2000;

interface ChatContext {
    card: ProfileCard;
    sessionId: string;
    transcript: TranscriptState;
    renderedEntries: number;
    awaitingReply: boolean;
    generation: number;
}

let active: ChatContext | null = null;

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) {
        throw new Error(`missing element #${id}`);
    }
    return node as T;
}

function show(view: "picker" | "chat"): void {
    el("picker-view").hidden = view !== "picker";
    el("chat-view").hidden = view !== "chat";
}

function setBanner(text: string): void {
    const banner = el("banner");
    banner.textContent = text;
    banner.hidden = !text;
}

function setNotice(text: string): void {
    const notice = el("notice");
    notice.textContent = text;
    notice.hidden = !text;
    if (text) {
        window.setTimeout(() => {
            notice.hidden = true;
        }, 1500);
    }
}

// ---------------------------------------------------------------------------
// Profile picker

async function loadPicker(): Promise<void> {
    show("picker");
    const list = el("profiles");
    list.textContent = "";
    setBanner("");
    let cards: ProfileCard[];
    try {
        cards = await fetchProfiles();
    } catch {
        setBanner("Cannot reach the agent service. Retrying...");
        window.setTimeout(loadPicker, RETRY_DELAY_MS);
        return;
    }
    if (cards.length === 0) {
        const empty = document.createElement("p");
        empty.className = "empty-state";
        empty.textContent = "No personalized agents are deployed yet.";
        list.appendChild(empty);
        return;
    }
    for (const card of cards) {
        const button = document.createElement("button");
        button.className = "profile-card";
        const title = document.createElement("strong");
        title.textContent = card.profile_label;
        const detail = document.createElement("span");
        detail.textContent = card.description;
        button.append(title, detail);
        button.addEventListener("click", () => {
            startChat(card);
        });
        list.appendChild(button);
    }
}

// ---------------------------------------------------------------------------
// Chat view

async function startChat(card: ProfileCard): Promise<void> {
    let sessionId: string;
    try {
        sessionId = await createSession(card.bundle_id);
    } catch (error) {
        setBanner(error instanceof ApiError ? error.message : "Could not start a session.");
        return;
    }
    const generation = (active?.generation ?? 0) + 1;
    active = {
        card,
        sessionId,
        transcript: emptyTranscript(),
        renderedEntries: 0,
        awaitingReply: false,
        generation,
    };
    el("messages").textContent = "";
    el("chat-title").textContent = card.profile_label;
    const root = el("chat-view");
    root.style.setProperty("--font-scale", String(card.font_scale));
    root.classList.toggle("high-contrast", card.high_contrast);
    setInputEnabled(true);
    show("chat");
    void pollLoop(active);
}

function setInputEnabled(enabled: boolean): void {
    (el("chat-input") as HTMLInputElement).disabled = !enabled;
    (el("send-button") as HTMLButtonElement).disabled = !enabled;
    if (enabled) {
        el("chat-input").focus();
    }
}

function appendBubble(className: string, text: string): HTMLElement {
    const bubble = document.createElement("div");
    bubble.className = `bubble ${className}`;
    bubble.textContent = text;
    el("messages").appendChild(bubble);
    bubble.scrollIntoView({ block: "end" });
    return bubble;
}

function renderNewEntries(context: ChatContext): void {
    const entries = context.transcript.entries;
    for (let i = context.renderedEntries; i < entries.length; i += 1) {
        renderEntry(entries[i]);
        context.awaitingReply = false;
        setInputEnabled(true);
    }
    context.renderedEntries = entries.length;
    el("typing").hidden = !context.transcript.typing;
}

function renderEntry(entry: TranscriptEntry): void {
    if (entry.kind === "error") {
        appendBubble("error", entry.text);
        return;
    }
    const bubble = appendBubble("agent", entry.text);
    if (entry.speech) {
        const spoken = speechSupported() && speak(entry.text, entry.speech);
        if (!spoken) {
            const icon = document.createElement("button");
            icon.className = "speaker";
            icon.textContent = "\u{1F50A}";
            icon.title = "Read aloud";
            icon.addEventListener("click", () => {
                speak(entry.text, entry.speech!);
            });
            bubble.appendChild(icon);
        }
    }
}

async function pollLoop(context: ChatContext): Promise<void> {
    while (active === context) {
        let events;
        try {
            events = await pollEvents(
                context.sessionId,
                context.transcript.lastSeenSequence,
                POLL_WAIT_SECS,
            );
        } catch (error) {
            if (error instanceof ApiError && error.status === 404) {
                setBanner("The session expired. Pick a profile to start again.");
                active = null;
                show("picker");
                void loadPicker();
                return;
            }
            setBanner("Connection lost. Reconnecting...");
            await delay(RETRY_DELAY_MS);
            continue; // resume from lastSeenSequence: no duplicate bubbles
        }
        if (active !== context) {
            return;
        }
        setBanner("");
        context.transcript = applyEvents(context.transcript, events);
        renderNewEntries(context);
    }
}

function delay(ms: number): Promise<void> {
    return new Promise((resolve) => window.setTimeout(resolve, ms));
}

async function sendCurrentMessage(): Promise<void> {
    const context = active;
    if (!context || context.awaitingReply) {
        return;
    }
    const input = el<HTMLInputElement>("chat-input");
    const text = input.value.trim();
    if (!text) {
        return;
    }
    appendBubble("user", text); // optimistic echo; not a server event
    input.value = "";
    context.awaitingReply = true;
    setInputEnabled(false);
    try {
        await postMessage(context.sessionId, text);
    } catch (error) {
        context.awaitingReply = false;
        setInputEnabled(true);
        if (error instanceof ApiError && error.status === 409) {
            setNotice("Please wait for the current reply.");
        } else {
            appendBubble("error", "Could not send the message.");
        }
    }
}

function wireUp(): void {
    el("chat-form").addEventListener("submit", (event) => {
        event.preventDefault();
        void sendCurrentMessage();
    });
    el("back-button").addEventListener("click", () => {
        active = null;
        void loadPicker();
    });
    void loadPicker();
}

document.addEventListener("DOMContentLoaded", wireUp);
