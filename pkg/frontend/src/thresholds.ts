/** Threshold editor support: client-side validation mirroring the server's
 * invariants, and the POST /reload round-trip. Invalid buffers are never
 * submitted; server-side rejections keep the buffer for correction. */

import type { ThresholdDoc } from "./types.js";

const PCT_FIELDS: (keyof ThresholdDoc)[] = [
    "mem_free_warn_pct",
    "gpu_util_warn_pct",
    "disk_free_warn_pct",
];

export function validateThresholds(doc: ThresholdDoc): string[] {
    const errors: string[] = [];
    if (!(doc.temp_warn_c < doc.temp_crit_c)) {
        errors.push(`warn < crit required: temp_warn_c ${doc.temp_warn_c} >= temp_crit_c ${doc.temp_crit_c}`);
    }
    for (const field of PCT_FIELDS) {
        const v = doc[field] as number;
        if (!(v >= 0 && v <= 100)) {
            errors.push(`${field} ${v} outside [0, 100]`);
        }
    }
    if (!(doc.heartbeat_timeout_s > 0)) {
        errors.push(`heartbeat_timeout_s must be > 0, got ${doc.heartbeat_timeout_s}`);
    }
    return errors;
}

export interface ReloadResult {
    ok: boolean;
    errors: string[];
    applied: ThresholdDoc | null;
    submitted: boolean;
}

export async function submitThresholds(
    baseUrl: string,
    doc: ThresholdDoc,
    fetchImpl: typeof fetch = fetch.bind(globalThis),
): Promise<ReloadResult> {
    const clientErrors = validateThresholds(doc);
    if (clientErrors.length) {
        return { ok: false, errors: clientErrors, applied: null, submitted: false };
    }
    const response = await fetchImpl(`${baseUrl.replace(/\/$/, "")}/reload`, {
        method: "POST",
        body: JSON.stringify(doc),
    });
    const body = (await response.json()) as { ok?: boolean; errors?: string[]; thresholds?: ThresholdDoc };
    if (!response.ok) {
        return { ok: false, errors: body.errors ?? ["reload rejected"], applied: null, submitted: true };
    }
    return { ok: true, errors: [], applied: body.thresholds ?? null, submitted: true };
}
