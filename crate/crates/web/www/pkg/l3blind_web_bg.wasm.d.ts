/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_detection_free: (a: number, b: number) => void;
export const __wbg_heatmap_free: (a: number, b: number) => void;
export const __wbg_traces_free: (a: number, b: number) => void;
export const channelHeatmap: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const convergenceTraces: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const detectConstellation: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number, number];
export const detection_evm: (a: number) => number;
export const detection_iters: (a: number) => number;
export const detection_points: (a: number) => [number, number];
export const detection_ser: (a: number) => number;
export const detection_users: (a: number) => [number, number];
export const heatmap_cols: (a: number) => number;
export const heatmap_rows: (a: number) => number;
export const heatmap_thetaEffective: (a: number) => number;
export const heatmap_values: (a: number) => [number, number];
export const traces_l3: (a: number) => [number, number];
export const traces_l4: (a: number) => [number, number];
export const traces_planted: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
