/* tslint:disable */
/* eslint-disable */

/**
 * A 1D Gaussian evolved under `V = Ω(t)x²/2` with coupling `|u|^{2σ}u`.
 */
export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    advance(steps: number): void;
    density(): Float64Array;
    /**
     * `sigma = 0` gives a linear run.
     */
    constructor(sigma: number, c: number, gamma: number, velocity: number);
    nodes(): Float64Array;
    /**
     * `‖u‖ + ‖xu‖ + ‖∂u‖`
     */
    sigma1(): number;
    time(): number;
}

export function hill_curves(c: number, gamma: number, t1: number, samples: number): Float64Array;

export function ledger_curve(c: number, alpha: number, t_max: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly hill_curves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly ledger_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly simulation_advance: (a: number, b: number) => [number, number];
    readonly simulation_density: (a: number) => [number, number];
    readonly simulation_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly simulation_nodes: (a: number) => [number, number];
    readonly simulation_sigma1: (a: number) => [number, number, number];
    readonly simulation_time: (a: number) => number;
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
