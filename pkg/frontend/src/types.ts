/** Wire shapes served by the monitoring service. */

export type NodeState = "ok" | "warn" | "crit" | "offline";

export interface VisualDirective {
    kind: string; // whole-node-color | component-highlight | fan-speed | fill-level | beacon | texture
    target: string;
    value: string | number;
}

export interface NodeStatusDto {
    node_id: string;
    state: NodeState;
    alerts: string[];
    directives: VisualDirective[];
    component_loads: Record<string, number>;
    last_seen: number | null;
    jobs: [string, string][];
    missing_fields: string[];
    readings: Record<string, number>;
    rack?: string;
    profile?: string;
}

export interface Rollup {
    states: Record<string, number>;
    alerts: Record<string, number>;
    alert_nodes: Record<string, string[]>;
}

export interface JobDto {
    job_id: string;
    user: string;
    nodes: string[];
    started_ns: number;
}

export interface SensorDto {
    location: string;
    readings: Record<string, number>;
    ts: number;
}

export interface Snapshot {
    seq: number;
    generated_at: number;
    nodes: NodeStatusDto[];
    rollup: Rollup;
    jobs: JobDto[];
    sensors: Record<string, SensorDto>;
    topology_digest: string;
}

export interface StreamEvent {
    seq: number;
    kind: string; // snapshot | node_status | job | rollup | heartbeat
    payload: unknown;
}

/** Threshold document POSTed to /reload. */
export interface ThresholdDoc {
    heartbeat_timeout_s: number;
    mem_free_warn_pct: number;
    cpu_load_per_core_warn: number;
    gpu_util_warn_pct: number;
    disk_free_warn_pct: number;
    temp_warn_c: number;
    temp_crit_c: number;
    power_warn_w: number;
    open_rate_warn_per_10m: number;
    reference_stack_version: string;
    expected_mounts: string[];
    profiles?: Record<string, Partial<ThresholdDoc>>;
}

export const DEFAULT_THRESHOLDS: ThresholdDoc = {
    heartbeat_timeout_s: 60,
    mem_free_warn_pct: 10,
    cpu_load_per_core_warn: 1.5,
    gpu_util_warn_pct: 95,
    disk_free_warn_pct: 10,
    temp_warn_c: 70,
    temp_crit_c: 80,
    power_warn_w: 1000,
    open_rate_warn_per_10m: 100000,
    reference_stack_version: "2021.06",
    expected_mounts: ["/home", "/scratch"],
};
