/** Console bootstrap: one view model, one stream, rAF-batched rendering. */

import { renderApp, showEditorErrors } from "./dom.js";
import { ViewModel } from "./state.js";
import { StreamClient } from "./stream.js";
import { submitThresholds } from "./thresholds.js";
import { DEFAULT_THRESHOLDS } from "./types.js";
import type { ThresholdDoc } from "./types.js";

const params = new URLSearchParams(location.search);
const serviceUrl = params.get("service") ?? location.origin;

const root = document.getElementById("app")!;
const vm = new ViewModel();
let frame = 0;

function scheduleRender(): void {
    if (vm.paused || frame) {
        return;
    }
    frame = requestAnimationFrame(() => {
        frame = 0;
        renderApp(root, vm, actions);
    });
}

const actions = {
    selectNode(nodeId: string | null): void {
        vm.selectedNode = nodeId;
        scheduleRender();
    },
    togglePause(): void {
        vm.paused = !vm.paused;
        if (!vm.paused) {
            scheduleRender();
        } else {
            renderApp(root, vm, actions); // repaint the button state once
        }
    },
    applyThresholds(text: string): void {
        let doc: ThresholdDoc;
        try {
            doc = JSON.parse(text) as ThresholdDoc;
        } catch (err) {
            showEditorErrors(root, [`not valid JSON: ${err}`]);
            return;
        }
        void submitThresholds(serviceUrl, doc).then((result) => {
            showEditorErrors(root, result.ok ? ["applied"] : result.errors);
        });
    },
};

vm.thresholdBuffer = JSON.stringify(DEFAULT_THRESHOLDS, null, 2);

const client = new StreamClient(serviceUrl, vm, {
    onUpdate: () => scheduleRender(),
    onStatus: () => scheduleRender(),
});
void client.run();
renderApp(root, vm, actions);
