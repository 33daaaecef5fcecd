/* tslint:disable */
/* eslint-disable */

/**
 * A reduced multi-law network trained in place, a few epochs per call, so
 * the page can redraw between calls.
 */
export class DemoTrainer {
    free(): void;
    [Symbol.dispose](): void;
    epoch(): number;
    loss(): number;
    constructor(seed: bigint, hidden_layers: number, hidden_width: number, points_per_law: number, learning_rate: number);
    /**
     * Predicted `J` on an `nx` by `nt` grid (t-major, times `(k+1)/nt`).
     */
    predict(law: number, nx: number, nt: number): Float64Array;
    /**
     * Relative error (percent) against the reference on a 50 x 50 grid.
     */
    relative_error(law: number): number;
    /**
     * Runs `epochs` full-batch Adam steps and returns the last loss.
     */
    train(epochs: number): number;
}

/**
 * Reference solution on the default spatial grid with `snapshots`
 * equispaced output times in (0, 1].
 */
export class Field {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `J` at every snapshot, one row of `x().length` values per time.
     */
    j(): Float64Array;
    constructor(law: number, j_bar: number, phi0: number, gamma_hat: number, mu_hat: number, snapshots: number);
    /**
     * Excess pore pressure relative to the drained surface.
     */
    pressure(snapshot: number): Float64Array;
    settlement(snapshot: number): Float64Array;
    t(): Float64Array;
    x(): Float64Array;
}

/**
 * `[J..., g..., D...]` for `n` values of `J` between just above the
 * porosity limit `1 - phi0` and 1.2.
 */
export function material_curves(law: number, phi0: number, gamma_hat: number, mu_hat: number, n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demotrainer_free: (a: number, b: number) => void;
    readonly __wbg_field_free: (a: number, b: number) => void;
    readonly demotrainer_epoch: (a: number) => number;
    readonly demotrainer_loss: (a: number) => number;
    readonly demotrainer_new: (a: bigint, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly demotrainer_predict: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demotrainer_relative_error: (a: number, b: number) => [number, number, number];
    readonly demotrainer_train: (a: number, b: number) => [number, number, number];
    readonly field_j: (a: number) => [number, number];
    readonly field_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly field_pressure: (a: number, b: number) => [number, number, number, number];
    readonly field_settlement: (a: number, b: number) => [number, number, number, number];
    readonly field_t: (a: number) => [number, number];
    readonly field_x: (a: number) => [number, number];
    readonly material_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
