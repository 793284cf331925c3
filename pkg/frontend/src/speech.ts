// Client-side speech synthesis; the server only ships parameters.

import { SpeechParams } from "./transcript.js";

export function speechSupported(): boolean {
    return typeof window !== "undefined" && "speechSynthesis" in window;
}

export function speak(text: string, params: SpeechParams): boolean {
    if (!speechSupported()) {
        return false;
    }
    const utterance = new SpeechSynthesisUtterance(text);
    utterance.rate = params.voiceSpeed;
    const voices = window.speechSynthesis.getVoices();
    const wanted = voices.find((voice) =>
        voice.name.toLowerCase().includes(params.voiceStyle.toLowerCase()),
    );
    if (wanted) {
        utterance.voice = wanted;
    }
    window.speechSynthesis.speak(utterance);
    return true;
}
