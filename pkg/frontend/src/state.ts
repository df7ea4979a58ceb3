/** View model: the committed snapshot plus delta application.
 *
 * Deltas arrive in per-tick groups that the service always terminates with
 * a rollup event; node/job events stage into a pending copy and the rollup
 * commits it, so a renderer never sees half a tick. A sequence gap means a
 * missed tick and reports "gap" so the owner can refetch /snapshot.
 */

import type { JobDto, NodeStatusDto, Snapshot, StreamEvent } from "./types.js";

export type ApplyResult = "snapshot" | "staged" | "committed" | "ignored" | "gap";

export interface StaleInfo {
    sinceMs: number;
    lastSeq: number;
    lastGeneratedAt: number;
}

const WARNING_LIMIT = 50;

export class ViewModel {
    committed: Snapshot | null = null;
    selectedRack: string | null = null;
    selectedNode: string | null = null;
    paused = false;
    stale: StaleInfo | null = null;
    /** Operator-owned threshold editor buffer; survives re-renders. */
    thresholdBuffer = "";
    /** Monotone from the operator's perspective, across service restarts. */
    updates = 0;
    epoch = 0;
    warnings: string[] = [];

    private pending: Snapshot | null = null;

    get seq(): number {
        return this.committed ? this.committed.seq : 0;
    }

    loadSnapshot(snapshot: Snapshot): void {
        if (this.committed && snapshot.seq <= this.committed.seq) {
            this.epoch += 1; // service restarted or state rewound
        }
        this.committed = snapshot;
        this.pending = null;
        this.updates += 1;
        this.stale = null;
    }

    apply(ev: StreamEvent): ApplyResult {
        if (ev.kind === "snapshot") {
            this.loadSnapshot(ev.payload as Snapshot);
            return "snapshot";
        }
        if (ev.kind === "heartbeat") {
            return "ignored";
        }
        if (!this.committed) {
            return "gap";
        }
        if (ev.seq <= this.committed.seq) {
            return "ignored"; // replay of something already committed
        }
        if (ev.seq !== this.committed.seq + 1) {
            return "gap"; // missed at least one tick's commit
        }
        const pending = this.ensurePending(ev.seq);
        switch (ev.kind) {
            case "node_status": {
                const status = ev.payload as NodeStatusDto;
                const idx = pending.nodes.findIndex((n) => n.node_id === status.node_id);
                if (idx < 0) {
                    this.warn(`node_status for unknown node ${status.node_id} ignored`);
                    return "staged";
                }
                pending.nodes[idx] = status;
                return "staged";
            }
            case "job": {
                pending.jobs = (ev.payload as { jobs: JobDto[] }).jobs;
                return "staged";
            }
            case "rollup": {
                const payload = ev.payload as {
                    rollup: Snapshot["rollup"];
                    sensors: Snapshot["sensors"];
                    generated_at: number;
                };
                pending.rollup = payload.rollup;
                pending.sensors = payload.sensors;
                pending.generated_at = payload.generated_at;
                pending.seq = ev.seq;
                this.committed = pending;
                this.pending = null;
                this.updates += 1;
                return "committed";
            }
            default:
                this.warn(`unknown event kind ${ev.kind} ignored`);
                return "staged";
        }
    }

    markDisconnected(nowMs: number): void {
        if (!this.stale && this.committed) {
            this.stale = {
                sinceMs: nowMs,
                lastSeq: this.committed.seq,
                lastGeneratedAt: this.committed.generated_at,
            };
        }
    }

    markConnected(): void {
        this.stale = null;
    }

    nodeById(nodeId: string): NodeStatusDto | undefined {
        return this.committed?.nodes.find((n) => n.node_id === nodeId);
    }

    private ensurePending(seq: number): Snapshot {
        if (!this.pending) {
            const base = this.committed as Snapshot;
            this.pending = {
                seq,
                generated_at: base.generated_at,
                nodes: base.nodes.slice(),
                rollup: base.rollup,
                jobs: base.jobs,
                sensors: base.sensors,
                topology_digest: base.topology_digest,
            };
        }
        return this.pending;
    }

    private warn(message: string): void {
        this.warnings.push(message);
        if (this.warnings.length > WARNING_LIMIT) {
            this.warnings.shift();
        }
    }
}

/** Key-sorted stringify so structurally equal states compare equal. */
export function canonical(value: unknown): string {
    return JSON.stringify(sortKeys(value));
}

function sortKeys(value: unknown): unknown {
    if (Array.isArray(value)) {
        return value.map(sortKeys);
    }
    if (value !== null && typeof value === "object") {
        const out: Record<string, unknown> = {};
        for (const key of Object.keys(value as Record<string, unknown>).sort()) {
            out[key] = sortKeys((value as Record<string, unknown>)[key]);
        }
        return out;
    }
    return value;
}
