/* tslint:disable */
/* eslint-disable */

/**
 * A finished 2D tiling, flattened for canvas drawing.
 */
export class Tiling {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Vertex colors in `{0, 1, 2}`.
     */
    colors(): Uint8Array;
    /**
     * `x_0, y_0, x_1, y_1, ...`
     */
    positions(): Float64Array;
    /**
     * Regularity ratio per triangle.
     */
    thetas(): Float64Array;
    /**
     * Three vertex ids per triangle.
     */
    triangles(): Uint32Array;
    /**
     * Worst triangle against a half unit square.
     */
    readonly ratio_vs_kuhn: number;
    readonly worst_theta: number;
}

/**
 * `(t, F)` pairs, flattened, with `p_j = t` and every other component optimal.
 */
export function objective_profile(d: number, j: number, lo: number, hi: number, samples: number): Float64Array;

/**
 * The closed-form optimal parameters, for comparison.
 */
export function optimal(d: number): Float64Array;

/**
 * `p_hat` followed by `F(p_hat)`; zero starts picks the default count.
 */
export function optimize(d: number, starts: number): Float64Array;

/**
 * Tiling with `p = (1, p2)`; `swap` recolors the line before lifting.
 */
export function tiling(p2: number, swap: boolean, columns: number, rows: number): Tiling;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_tiling_free: (a: number, b: number) => void;
    readonly objective_profile: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly optimal: (a: number) => [number, number, number, number];
    readonly optimize: (a: number, b: number) => [number, number, number, number];
    readonly tiling: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly tiling_colors: (a: number) => [number, number];
    readonly tiling_positions: (a: number) => [number, number];
    readonly tiling_ratio_vs_kuhn: (a: number) => number;
    readonly tiling_thetas: (a: number) => [number, number];
    readonly tiling_triangles: (a: number) => [number, number];
    readonly tiling_worst_theta: (a: number) => number;
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
