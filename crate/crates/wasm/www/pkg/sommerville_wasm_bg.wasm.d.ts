/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_tiling_free: (a: number, b: number) => void;
export const objective_profile: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const optimal: (a: number) => [number, number, number, number];
export const optimize: (a: number, b: number) => [number, number, number, number];
export const tiling: (a: number, b: number, c: number, d: number) => [number, number, number];
export const tiling_colors: (a: number) => [number, number];
export const tiling_positions: (a: number) => [number, number];
export const tiling_ratio_vs_kuhn: (a: number) => number;
export const tiling_thetas: (a: number) => [number, number];
export const tiling_triangles: (a: number) => [number, number];
export const tiling_worst_theta: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
