import { describe, expect, it } from "vitest";

import { quantizeRate, renderNodeDetail, renderRackView, STATE_COLORS } from "../src/render.js";
import { ViewModel } from "../src/state.js";
import { loadSession, nodeDto, smallSnapshot } from "./helpers.js";

function vmFrom(snapshot: ReturnType<typeof smallSnapshot>): ViewModel {
    const vm = new ViewModel();
    vm.loadSnapshot(snapshot);
    return vm;
}

function sessionVm(): ViewModel {
    const session = loadSession();
    const vm = new ViewModel();
    vm.loadSnapshot(session.initial);
    for (const ev of session.events) {
        vm.apply(ev);
    }
    return vm;
}

describe("rack grid", () => {
    it("renders a uniformly nominal grid for an all-ok snapshot", () => {
        const view = renderRackView(vmFrom(smallSnapshot()));
        const cells = view.racks.flatMap((r) => r.cells);
        expect(cells).toHaveLength(3);
        expect(new Set(cells.map((c) => c.color))).toEqual(new Set([STATE_COLORS.ok]));
        expect(cells.every((c) => c.alertCount === 0)).toBe(true);
    });

    it("shows exactly one solid red cell for the downed node", () => {
        const view = renderRackView(sessionVm());
        const red = view.racks.flatMap((r) => r.cells).filter((c) => c.color === STATE_COLORS.offline);
        expect(red.map((c) => c.nodeId)).toEqual(["n0011"]);
    });

    it("groups cells by rack", () => {
        const view = renderRackView(sessionVm());
        const rackIds = view.racks.map((r) => r.rackId);
        expect(rackIds).toEqual(["r01", "r02", "storage"]);
        expect(view.racks[0].cells).toHaveLength(48);
        expect(view.racks[2].cells).toHaveLength(3);
    });

    it("margin overlay counts agree with a client-side tally of the cells", () => {
        const vm = sessionVm();
        const view = renderRackView(vm);
        const cells = view.racks.flatMap((r) => r.cells);
        const tally: Record<string, number> = { ok: 0, warn: 0, crit: 0, offline: 0 };
        for (const cell of cells) {
            tally[cell.state] += 1;
        }
        expect(view.overlay!.states).toEqual(tally);
        const alertTally = cells.reduce((sum, c) => sum + c.alertCount, 0);
        const overlayAlerts = Object.entries(view.overlay!.alerts)
            .filter(([k]) => k !== "job_occupancy")
            .reduce((sum, [, v]) => sum + v, 0);
        expect(overlayAlerts).toBe(alertTally);
    });

    it("carries a stale banner when disconnected", () => {
        const vm = sessionVm();
        vm.markDisconnected(123456);
        const view = renderRackView(vm);
        expect(view.staleBanner).toContain("seq 23");
    });
});

describe("node detail", () => {
    it("offline node renders whole-model red with animations stopped", () => {
        const detail = renderNodeDetail(sessionVm(), "n0011")!;
        expect(detail.tint).toBe("red");
        expect(detail.animationsStopped).toBe(true);
        for (const block of Object.values(detail.blocks)) {
            expect(block.turbineStep === null || block.turbineStep === 0).toBe(true);
        }
    });

    it("fan-speed directive 0.5 spins the turbine at half rate", () => {
        const node = nodeDto("n0001", "r01", {
            directives: [{ kind: "fan-speed", target: "cpu", value: 0.5 }],
        });
        const vm = vmFrom(smallSnapshot({ nodes: [node] }));
        const detail = renderNodeDetail(vm, "n0001")!;
        expect(detail.blocks.cpu.turbineStep).toBe(0.5);
    });

    it("animation rates are quantized to deterministic steps", () => {
        expect(quantizeRate(0.4499)).toBe(0.4);
        expect(quantizeRate(0.45)).toBe(0.5);
        expect(quantizeRate(7)).toBe(1);
        expect(quantizeRate(-1)).toBe(0);
    });

    it("deconstructs the node into labeled component blocks", () => {
        const session = loadSession();
        const gpuNode = session.final.nodes.find((n) => n.profile === "gaia-v100")!;
        const detail = renderNodeDetail(sessionVm(), gpuNode.node_id)!;
        expect(Object.keys(detail.blocks)).toEqual(["cpu", "ram", "disk", "gpu"]);
        expect(detail.blocks.cpu.label).toBe("CPU");
        const cpuOnly = renderNodeDetail(sessionVm(), "n0001")!;
        expect(Object.keys(cpuOnly.blocks)).toEqual(["cpu", "ram", "disk"]);
    });

    it("every directive in the final snapshot maps to exactly one rendered attribute", () => {
        const session = loadSession();
        const vm = sessionVm();
        for (const node of session.final.nodes) {
            const detail = renderNodeDetail(vm, node.node_id)!;
            expect(detail.renderedDirectives).toBe(node.directives.length);
            const attributeCount =
                (detail.tint === "#f5f1ea" ? 0 : 1) +
                (detail.beacon ? node.directives.filter((d) => d.kind === "beacon").length : 0) +
                detail.textures.length +
                detail.extraHighlights.length +
                detail.badges.length +
                Object.values(detail.blocks).filter((b) => b.highlight !== null).length +
                Object.values(detail.blocks).filter((b) => b.fill !== null).length +
                node.directives.filter((d) => d.kind === "fan-speed").length;
            expect(attributeCount).toBe(node.directives.length);
        }
    });

    it("unknown directive kinds render as a generic warning badge", () => {
        const node = nodeDto("n0001", "r01", {
            directives: [{ kind: "laser-show", target: "chassis", value: "disco" }],
        });
        const detail = renderNodeDetail(vmFrom(smallSnapshot({ nodes: [node] })), "n0001")!;
        expect(detail.badges).toEqual([{ kind: "laser-show", target: "chassis" }]);
    });

    it("job occupancy renders a texture per job with user labels", () => {
        const vm = sessionVm();
        const stormNode = renderNodeDetail(vm, "n0003")!;
        expect(stormNode.textures.length).toBeGreaterThan(0);
        expect(stormNode.textures.every((t) => t.startsWith("weave-"))).toBe(true);
        expect(stormNode.jobs.map(([id]) => id)).toContain("23159087");
    });

    it("rendering is a pure function of the view model (replay determinism)", () => {
        const session = loadSession();
        const render = () => {
            const vm = new ViewModel();
            vm.loadSnapshot(session.initial);
            for (const ev of session.events) {
                vm.apply(ev);
            }
            return JSON.stringify({
                grid: renderRackView(vm),
                details: session.final.nodes.map((n) => renderNodeDetail(vm, n.node_id)),
            });
        };
        expect(render()).toBe(render());
    });
});
