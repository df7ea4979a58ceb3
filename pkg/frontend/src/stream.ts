/** NDJSON stream consumer: snapshot-then-deltas with gap recovery.
 *
 * The service opens every stream with a full snapshot event. On a sequence
 * gap the client refetches GET /snapshot instead of guessing; on
 * disconnect it reconnects with exponential backoff while the view model
 * carries a stale-data marker.
 */

import { ViewModel } from "./state.js";
import type { Snapshot, StreamEvent } from "./types.js";

export interface StreamOptions {
    fetchImpl?: typeof fetch;
    onUpdate?: (vm: ViewModel) => void;
    onStatus?: (status: "connected" | "disconnected" | "resynced") => void;
    backoffInitialMs?: number;
    backoffMaxMs?: number;
    sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class StreamClient {
    readonly vm: ViewModel;
    private readonly baseUrl: string;
    private readonly fetchImpl: typeof fetch;
    private readonly onUpdate: (vm: ViewModel) => void;
    private readonly onStatus: (status: "connected" | "disconnected" | "resynced") => void;
    private readonly backoffInitialMs: number;
    private readonly backoffMaxMs: number;
    private readonly sleep: (ms: number) => Promise<void>;
    private running = true;

    constructor(baseUrl: string, vm: ViewModel, options: StreamOptions = {}) {
        this.baseUrl = baseUrl.replace(/\/$/, "");
        this.vm = vm;
        this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
        this.onUpdate = options.onUpdate ?? (() => undefined);
        this.onStatus = options.onStatus ?? (() => undefined);
        this.backoffInitialMs = options.backoffInitialMs ?? 250;
        this.backoffMaxMs = options.backoffMaxMs ?? 8000;
        this.sleep = options.sleep ?? defaultSleep;
    }

    stop(): void {
        this.running = false;
    }

    /** Run until stop(); resolves once stopped. */
    async run(): Promise<void> {
        this.running = true;
        let backoff = this.backoffInitialMs;
        while (this.running) {
            try {
                await this.consumeOnce();
                backoff = this.backoffInitialMs; // clean EOF: service went away politely
            } catch {
                // fall through to reconnect
            }
            if (!this.running) {
                break;
            }
            this.vm.markDisconnected(Date.now());
            this.onStatus("disconnected");
            this.onUpdate(this.vm);
            await this.sleep(backoff);
            backoff = Math.min(backoff * 2, this.backoffMaxMs);
        }
    }

    /** One connection lifetime; returns on EOF, throws on transport error. */
    async consumeOnce(): Promise<void> {
        const response = await this.fetchImpl(`${this.baseUrl}/stream`);
        if (!response.ok || !response.body) {
            throw new Error(`stream request failed: ${response.status}`);
        }
        this.vm.markConnected();
        this.onStatus("connected");
        for await (const line of ndjsonLines(response.body)) {
            if (!this.running) {
                return;
            }
            await this.handleLine(line);
        }
    }

    async handleLine(line: string): Promise<void> {
        let event: StreamEvent;
        try {
            event = JSON.parse(line) as StreamEvent;
        } catch {
            return; // tolerate a torn line mid-disconnect
        }
        const result = this.vm.apply(event);
        if (result === "gap") {
            await this.resync();
            this.onStatus("resynced");
            this.onUpdate(this.vm);
        } else if (result === "committed" || result === "snapshot") {
            this.onUpdate(this.vm);
        }
    }

    async resync(): Promise<void> {
        const response = await this.fetchImpl(`${this.baseUrl}/snapshot`);
        if (!response.ok) {
            throw new Error(`snapshot refetch failed: ${response.status}`);
        }
        this.vm.loadSnapshot((await response.json()) as Snapshot);
    }
}

export async function* ndjsonLines(body: ReadableStream<Uint8Array>): AsyncGenerator<string> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    try {
        while (true) {
            const { done, value } = await reader.read();
            if (done) {
                break;
            }
            buffer += decoder.decode(value, { stream: true });
            let idx;
            while ((idx = buffer.indexOf("\n")) >= 0) {
                const line = buffer.slice(0, idx).trim();
                buffer = buffer.slice(idx + 1);
                if (line) {
                    yield line;
                }
            }
        }
        const rest = buffer.trim();
        if (rest) {
            yield rest;
        }
    } finally {
        reader.releaseLock();
    }
}
