/* tslint:disable */
/* eslint-disable */

/**
 * `{bits, terms, seed, chi}` → fidelity sweeps on a three-variable quantics function, with the
 * chain kept fixed and with structure search.
 */
export function compress_quantics(request: string): string;

/**
 * `{depth, alpha, chi, mode, sweeps}` → ground state of the hierarchical chain.
 */
export function ground_state(request: string): string;

/**
 * `{rho, bits, mode}` → four-variable Gaussian on the tree pairing (0,2) and (1,3), as a chain
 * and after structure sweeps.
 */
export function reconstruct_gaussian(request: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly compress_quantics: (a: number, b: number) => [number, number];
    readonly ground_state: (a: number, b: number) => [number, number];
    readonly reconstruct_gaussian: (a: number, b: number) => [number, number];
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
