import { readFileSync } from "node:fs";

import type { Snapshot, StreamEvent } from "../src/types.js";

export interface SessionFixture {
    meta: { nodes: number; initial_seq: number; final_seq: number };
    initial: Snapshot;
    events: StreamEvent[];
    final: Snapshot;
}

let cached: SessionFixture | null = null;

export function loadSession(): SessionFixture {
    if (!cached) {
        const url = new URL("./fixtures/session96.json", import.meta.url);
        cached = JSON.parse(readFileSync(url, "utf8")) as SessionFixture;
    }
    return cached;
}

export function smallSnapshot(overrides: Partial<Snapshot> = {}): Snapshot {
    return {
        seq: 1,
        generated_at: 1_000,
        nodes: [
            nodeDto("n0001", "r01"),
            nodeDto("n0002", "r01"),
            nodeDto("n0003", "r02"),
        ],
        rollup: {
            states: { ok: 3, warn: 0, crit: 0, offline: 0 },
            alerts: {},
            alert_nodes: {},
        },
        jobs: [],
        sensors: {},
        topology_digest: "t",
        ...overrides,
    };
}

export function nodeDto(nodeId: string, rack: string, overrides: Record<string, unknown> = {}) {
    return {
        node_id: nodeId,
        state: "ok" as const,
        alerts: [] as string[],
        directives: [],
        component_loads: { cpu: 0.4, memory: 0.5, disk: 0.3 },
        last_seen: 999,
        jobs: [] as [string, string][],
        missing_fields: [] as string[],
        readings: { temp_c: 45 },
        rack,
        profile: "xeon-p8260",
        ...overrides,
    };
}
