/* tslint:disable */
/* eslint-disable */

/**
 * Payload symbols after blind detection, scaled back to the alphabet.
 */
export class Detection {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Interleaved `re, im` pairs.
     */
    points(): Float64Array;
    /**
     * User index of each point.
     */
    users(): Uint32Array;
    readonly evm: number;
    readonly iters: number;
    readonly ser: number;
}

/**
 * Magnitudes of the angular-domain channel `|H̄|`.
 */
export class Heatmap {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Row-major `M×K`.
     */
    values(): Float64Array;
    /**
     * Number of users `K`.
     */
    readonly cols: number;
    /**
     * Number of angular bins `M`.
     */
    readonly rows: number;
    readonly thetaEffective: number;
}

/**
 * ℓ3 objective along the ℓ3 and ℓ4 iterations from one shared start,
 * divided by the planted-solution level.
 */
export class Traces {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    l3(): Float64Array;
    l4(): Float64Array;
    /**
     * Same normalization at the Stiefel factor of the true frame.
     */
    readonly planted: number;
}

export function channelHeatmap(clustered: boolean, k_users: number, n_h: number, n_v: number, theta: number, n_paths: number, seed: number): Heatmap;

export function convergenceTraces(k_users: number, m: number, t_len: number, theta: number, snr_db: number, seed: number): Traces;

export function detectConstellation(clustered: boolean, qam16: boolean, k_users: number, n_h: number, n_v: number, t_len: number, theta: number, snr_db: number, precondition: boolean, seed: number): Detection;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_detection_free: (a: number, b: number) => void;
    readonly __wbg_heatmap_free: (a: number, b: number) => void;
    readonly __wbg_traces_free: (a: number, b: number) => void;
    readonly channelHeatmap: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly convergenceTraces: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly detectConstellation: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
    readonly detection_evm: (a: number) => number;
    readonly detection_iters: (a: number) => number;
    readonly detection_points: (a: number) => [number, number];
    readonly detection_ser: (a: number) => number;
    readonly detection_users: (a: number) => [number, number];
    readonly heatmap_cols: (a: number) => number;
    readonly heatmap_rows: (a: number) => number;
    readonly heatmap_thetaEffective: (a: number) => number;
    readonly heatmap_values: (a: number) => [number, number];
    readonly traces_l3: (a: number) => [number, number];
    readonly traces_l4: (a: number) => [number, number];
    readonly traces_planted: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
