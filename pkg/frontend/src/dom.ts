/** Thin DOM layer over the pure renderers. */

import { renderNodeDetail, renderRackView, STATE_COLORS } from "./render.js";
import { ViewModel } from "./state.js";
import type { NodeDetail } from "./render.js";

export interface Actions {
    selectNode(nodeId: string | null): void;
    togglePause(): void;
    applyThresholds(text: string): void;
}

function el(tag: string, className?: string, text?: string): HTMLElement {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}

export function renderApp(root: HTMLElement, vm: ViewModel, actions: Actions): void {
    const view = renderRackView(vm);
    root.textContent = "";

    if (view.staleBanner) {
        root.appendChild(el("div", "banner stale", view.staleBanner));
    }
    if (view.empty) {
        root.appendChild(el("div", "banner", "waiting for first snapshot..."));
        return;
    }

    const overlay = el("div", "overlay");
    const o = view.overlay!;
    overlay.appendChild(el("span", "chip", `seq ${o.seq}${o.epoch ? ` (epoch ${o.epoch})` : ""}`));
    overlay.appendChild(el("span", "chip", new Date(o.generatedAt / 1e6).toISOString()));
    for (const [state, count] of Object.entries(o.states)) {
        if (count > 0) {
            const chip = el("span", `chip state-${state}`, `${state}: ${count}`);
            chip.style.background = STATE_COLORS[state] ?? "#ddd";
            overlay.appendChild(chip);
        }
    }
    for (const [kind, count] of Object.entries(o.alerts)) {
        overlay.appendChild(el("span", "chip alert", `${kind}: ${count}`));
    }
    overlay.appendChild(el("span", "chip", `jobs: ${o.jobs}`));
    const pause = el("button", "chip", vm.paused ? "resume" : "pause");
    pause.onclick = () => actions.togglePause();
    overlay.appendChild(pause);
    root.appendChild(overlay);

    const body = el("div", "body");
    const grid = el("div", "rack-grid");
    for (const rack of view.racks) {
        const rackBox = el("div", "rack");
        rackBox.appendChild(el("div", "rack-label", rack.rackId));
        const cells = el("div", "cells");
        for (const cell of rack.cells) {
            const cellEl = el("div", "cell" + (cell.selected ? " selected" : ""));
            cellEl.style.background = cell.color;
            cellEl.title = `${cell.nodeId} (${cell.state})`;
            if (cell.alertCount > 0) {
                cellEl.appendChild(el("span", "count", String(cell.alertCount)));
            }
            if (cell.hasJobs) {
                cellEl.classList.add("textured");
            }
            cellEl.onclick = () => actions.selectNode(cell.nodeId);
            cells.appendChild(cellEl);
        }
        rackBox.appendChild(cells);
        grid.appendChild(rackBox);
    }
    body.appendChild(grid);

    const side = el("div", "side");
    if (vm.selectedNode) {
        const detail = renderNodeDetail(vm, vm.selectedNode);
        if (detail) {
            side.appendChild(renderDetail(detail, actions));
        }
    } else {
        side.appendChild(el("div", "hint", "select a node to inspect its components"));
    }
    side.appendChild(renderThresholdEditor(vm, actions));
    body.appendChild(side);
    root.appendChild(body);
}

function renderDetail(detail: NodeDetail, actions: Actions): HTMLElement {
    const box = el("div", "detail");
    box.style.background = detail.tint;
    const head = el("div", "detail-head");
    head.appendChild(el("strong", undefined, detail.nodeId));
    head.appendChild(el("span", `state state-${detail.state}`, detail.state));
    if (detail.beacon) {
        const beacon = el("span", "beacon", "●");
        beacon.style.color = detail.beacon;
        head.appendChild(beacon);
    }
    const close = el("button", "chip", "close");
    close.onclick = () => actions.selectNode(null);
    head.appendChild(close);
    box.appendChild(head);

    for (const [key, block] of Object.entries(detail.blocks)) {
        const row = el("div", `block block-${key}`);
        row.style.background = block.color;
        if (block.highlight) {
            row.style.outline = `3px solid ${block.highlight}`;
        }
        row.appendChild(el("span", "block-label", block.label));
        if (block.turbineStep !== null) {
            const turbine = el("span", "turbine", "✺");
            turbine.style.animationDuration = block.turbineStep > 0 ? `${2 / block.turbineStep}s` : "0s";
            turbine.style.animationPlayState =
                detail.animationsStopped || block.turbineStep === 0 ? "paused" : "running";
            row.appendChild(turbine);
        }
        const level = block.fill ?? block.load;
        if (level !== null) {
            const gauge = el("span", "gauge");
            const fillEl = el("span", "gauge-fill");
            fillEl.style.width = `${Math.round(level * 100)}%`;
            gauge.appendChild(fillEl);
            row.appendChild(gauge);
        }
        box.appendChild(row);
    }
    for (const extra of detail.extraHighlights) {
        box.appendChild(el("div", "extra", `component ${extra.target}`)).setAttribute(
            "style",
            `outline: 2px solid ${extra.color}`,
        );
    }
    if (detail.textures.length) {
        const jobs = el("div", "jobs");
        detail.jobs.forEach(([jobId, user], i) => {
            jobs.appendChild(el("span", `texture ${detail.textures[i] ?? ""}`, `${jobId} (${user})`));
        });
        box.appendChild(jobs);
    }
    const readings = Object.entries(detail.readings)
        .map(([k, v]) => `${k}=${v}`)
        .join("  ");
    if (readings) {
        box.appendChild(el("div", "readings", readings));
    }
    if (detail.alerts.length) {
        box.appendChild(el("div", "alerts", detail.alerts.join(", ")));
    }
    for (const badge of detail.badges) {
        box.appendChild(el("span", "badge", `! ${badge.kind}@${badge.target}`));
    }
    return box;
}

function renderThresholdEditor(vm: ViewModel, actions: Actions): HTMLElement {
    const box = el("div", "editor");
    box.appendChild(el("div", "editor-title", "alert thresholds"));
    const area = el("textarea", "threshold-buffer") as HTMLTextAreaElement;
    area.rows = 10;
    area.value = vm.thresholdBuffer;
    area.oninput = () => {
        vm.thresholdBuffer = area.value;
    };
    const apply = el("button", "chip", "apply thresholds");
    apply.onclick = () => actions.applyThresholds(vm.thresholdBuffer);
    box.appendChild(area);
    box.appendChild(apply);
    box.appendChild(el("div", "editor-errors"));
    return box;
}

export function showEditorErrors(root: HTMLElement, errors: string[]): void {
    const slot = root.querySelector(".editor-errors");
    if (slot) {
        slot.textContent = errors.join("; ");
    }
}
