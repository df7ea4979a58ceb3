/** Pure view computation: ViewModel in, renderable attribute trees out.
 *
 * Every directive kind has exactly one rendering rule; unknown kinds fall
 * back to a generic warning badge so a newer service never breaks an older
 * console. Animation rates are quantized to steps of 0.1 to keep replays
 * deterministic and comparable.
 */

import { ViewModel } from "./state.js";
import type { NodeStatusDto, VisualDirective } from "./types.js";

export const STATE_COLORS: Record<string, string> = {
    ok: "#9ed9ae",
    warn: "#f4c95d",
    crit: "#f08c5a",
    offline: "#e03131",
};

/** Low-intensity base hues so alert colors dominate the scene. */
export const BASE_PALETTE = {
    chassis: "#f5f1ea",
    cpu: "#f2d0a4",
    ram: "#cfe8d8",
    disk: "#d7e3f4",
    gpu: "#e8d4f2",
};

const BEACON_RANK: Record<string, number> = { red: 3, orange: 2, yellow: 1 };

export function quantizeRate(value: number): number {
    const clamped = Math.min(1, Math.max(0, value));
    return Math.round(clamped * 10) / 10;
}

export interface RackCell {
    nodeId: string;
    state: string;
    color: string;
    alertCount: number;
    hasJobs: boolean;
    selected: boolean;
}

export interface RackGroup {
    rackId: string;
    cells: RackCell[];
}

export interface MarginOverlay {
    seq: number;
    epoch: number;
    generatedAt: number;
    states: Record<string, number>;
    alerts: Record<string, number>;
    jobs: number;
}

export interface RackView {
    racks: RackGroup[];
    overlay: MarginOverlay | null;
    staleBanner: string | null;
    empty: boolean;
}

export function renderRackView(vm: ViewModel): RackView {
    const snapshot = vm.committed;
    if (!snapshot) {
        return { racks: [], overlay: null, staleBanner: vm.stale ? staleText(vm) : null, empty: true };
    }
    const groups = new Map<string, RackCell[]>();
    for (const node of snapshot.nodes) {
        const rack = node.rack ?? "unracked";
        if (!groups.has(rack)) {
            groups.set(rack, []);
        }
        const informational = node.alerts.filter((a) => a !== "job_occupancy");
        groups.get(rack)!.push({
            nodeId: node.node_id,
            state: node.state,
            color: STATE_COLORS[node.state] ?? STATE_COLORS.warn,
            alertCount: informational.length,
            hasJobs: node.jobs.length > 0,
            selected: vm.selectedNode === node.node_id,
        });
    }
    const racks = [...groups.entries()]
        .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
        .map(([rackId, cells]) => ({ rackId, cells }));
    return {
        racks,
        overlay: {
            seq: snapshot.seq,
            epoch: vm.epoch,
            generatedAt: snapshot.generated_at,
            states: snapshot.rollup.states,
            alerts: snapshot.rollup.alerts,
            jobs: snapshot.jobs.length,
        },
        staleBanner: vm.stale ? staleText(vm) : null,
        empty: false,
    };
}

function staleText(vm: ViewModel): string {
    const info = vm.stale!;
    const when = new Date(info.lastGeneratedAt / 1e6).toISOString();
    return `STALE DATA - disconnected, showing seq ${info.lastSeq} from ${when}`;
}

export interface ComponentBlock {
    label: string;
    color: string;
    load: number | null; // utilization fraction from component_loads
    turbineStep: number | null; // quantized animation rate, null = no turbine
    fill: number | null; // gauge level set by a fill-level directive
    highlight: string | null;
}

export interface NodeDetail {
    nodeId: string;
    state: string;
    tint: string; // whole-node color
    beacon: string | null;
    animationsStopped: boolean;
    blocks: Record<string, ComponentBlock>;
    extraHighlights: { target: string; color: string }[];
    textures: string[];
    jobs: [string, string][];
    readings: Record<string, number>;
    alerts: string[];
    missingFields: string[];
    badges: { kind: string; target: string }[]; // unknown directive kinds
    renderedDirectives: number;
}

function newBlock(label: string, color: string, load: number | null, spins: boolean): ComponentBlock {
    return {
        label,
        color,
        load,
        turbineStep: spins && load !== null ? quantizeRate(load) : spins ? 0 : null,
        fill: null,
        highlight: null,
    };
}

export function renderNodeDetail(vm: ViewModel, nodeId: string): NodeDetail | null {
    const node = vm.nodeById(nodeId);
    if (!node) {
        return null;
    }
    const loads = node.component_loads;
    const blocks: Record<string, ComponentBlock> = {
        cpu: newBlock("CPU", BASE_PALETTE.cpu, loads.cpu ?? null, true),
        ram: newBlock("RAM", BASE_PALETTE.ram, loads.memory ?? null, false),
        disk: newBlock("Storage", BASE_PALETTE.disk, loads.disk ?? null, false),
    };
    if ("gpu" in loads || node.profile === "gaia-v100") {
        blocks.gpu = newBlock("GPU", BASE_PALETTE.gpu, loads.gpu ?? null, true);
    }
    const detail: NodeDetail = {
        nodeId,
        state: node.state,
        tint: BASE_PALETTE.chassis,
        beacon: null,
        animationsStopped: false,
        blocks,
        extraHighlights: [],
        textures: [],
        jobs: node.jobs,
        readings: node.readings,
        alerts: node.alerts,
        missingFields: node.missing_fields,
        badges: [],
        renderedDirectives: 0,
    };
    for (const directive of node.directives) {
        applyDirective(detail, directive);
    }
    if (node.state === "offline") {
        detail.animationsStopped = true;
        for (const block of Object.values(detail.blocks)) {
            if (block.turbineStep !== null) {
                block.turbineStep = 0;
            }
        }
    }
    return detail;
}

const BLOCK_TARGETS: Record<string, string> = {
    cpu: "cpu",
    gpu: "gpu",
    memory: "ram",
    ram: "ram",
    disk: "disk",
};

/** One rule per directive kind; every directive lands on exactly one attribute. */
function applyDirective(detail: NodeDetail, directive: VisualDirective): void {
    switch (directive.kind) {
        case "whole-node-color":
            detail.tint = String(directive.value);
            break;
        case "component-highlight": {
            const block = detail.blocks[BLOCK_TARGETS[directive.target] ?? ""];
            if (block) {
                block.highlight = String(directive.value);
            } else {
                detail.extraHighlights.push({ target: directive.target, color: String(directive.value) });
            }
            break;
        }
        case "fan-speed": {
            const step = quantizeRate(Number(directive.value));
            const block = detail.blocks[BLOCK_TARGETS[directive.target] ?? ""];
            if (block) {
                block.turbineStep = step;
            } else {
                // node-level fan directive drives the chassis (CPU) turbine
                detail.blocks.cpu.turbineStep = step;
            }
            break;
        }
        case "fill-level": {
            const block = detail.blocks[BLOCK_TARGETS[directive.target] ?? ""];
            if (block) {
                block.fill = Math.min(1, Math.max(0, Number(directive.value)));
            } else {
                detail.extraHighlights.push({ target: directive.target, color: "gauge" });
            }
            break;
        }
        case "beacon": {
            const color = String(directive.value);
            if (!detail.beacon || (BEACON_RANK[color] ?? 0) > (BEACON_RANK[detail.beacon] ?? 0)) {
                detail.beacon = color;
            }
            break;
        }
        case "texture":
            detail.textures.push(String(directive.value));
            break;
        default:
            detail.badges.push({ kind: directive.kind, target: directive.target });
            break;
    }
    detail.renderedDirectives += 1;
}
