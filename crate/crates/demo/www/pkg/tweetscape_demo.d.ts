/* tslint:disable */
/* eslint-disable */

/**
 * `[width_m, depth_m, min_lat, min_lon, max_lat, max_lon]`
 */
export function frame_info(): Float64Array;

/**
 * Scene meters for a campus coordinate, `[x, y]`.
 */
export function project(lat: number, lon: number): Float64Array;

/**
 * Raw profile followed by the smoothed one, both `PROFILE_COLS` long.
 */
export function smooth_profile(seed: number, iterations: number, lambda: number): Float64Array;

/**
 * Five numbers per marker: `x, y, z, stack_index, alert (0|1)`.
 */
export function stack_markers(n: number, seed: number, cell_size_m: number): Float64Array;

/**
 * Campus coordinate for scene meters, `[lat, lon]`.
 */
export function unproject(x: number, y: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly frame_info: () => [number, number];
    readonly project: (a: number, b: number) => [number, number, number, number];
    readonly smooth_profile: (a: number, b: number, c: number) => [number, number, number, number];
    readonly stack_markers: (a: number, b: number, c: number) => [number, number, number, number];
    readonly unproject: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
