/* tslint:disable */
/* eslint-disable */

/**
 * Bounds from indicator intervals given as
 * `{"a":[min,max],"s":..,"x":..,"d":..,"e":..,"r":..,"k":..}`.
 */
export function bounds_from_indicators(indicators: string): string;

/**
 * Relative residual histories of GMRES with the block triangular and
 * MINRES with the block diagonal preconditioner.
 */
export function convergence_demo(discretization: string, cells: number, recipe_name: string, omega: number): string;

/**
 * Indicators, bounds, both preconditioned spectra and the containment
 * verdicts for a small mesh.
 */
export function spectrum_demo(discretization: string, cells: number, recipe_name: string, omega: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bounds_from_indicators: (a: number, b: number) => [number, number];
    readonly convergence_demo: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly spectrum_demo: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
