/* tslint:disable */
/* eslint-disable */

/**
 * Stage `stage` of `scheme`: float pieces for drawing, the exact set JSON
 * and the per-stage table.
 */
export function build_stage(scheme: string, stage: number): string;

export function dimension_report(scheme: string, stage: number, xi_max: number, bands: number, seed: bigint): string;

/**
 * `[ξ, |μ̂(ξ)|]` on `samples` log-spaced frequencies in `[1, xi_max]`.
 */
export function fourier_sweep(scheme: string, stage: number, xi_max: number, samples: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly build_stage: (a: number, b: number, c: number) => [number, number, number, number];
    readonly dimension_report: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly fourier_sweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
