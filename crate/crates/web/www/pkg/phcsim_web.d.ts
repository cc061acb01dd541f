/* tslint:disable */
/* eslint-disable */

/**
 * Predicted LOS at a facility with the field service times, for travel
 * times `0..=max_travel` in `points` steps.
 *
 * `queues` and `elapsed` hold one value per station in visit order
 * (ncd, doc, lab, pharmacy); a negative elapsed time marks an idle server.
 * `term` is `count` or `rate`. Returns pairs `travel, total` flattened.
 */
export function los_vs_travel(queues: Uint32Array, elapsed: Float64Array, arrival_rate: number, term: string, max_travel: number, points: number): Float64Array;

/**
 * Residual service time against elapsed time for a distribution written as
 * `uniform 2 5`, `truncnormal 3.451 0.873` or `exponential 0.5`.
 *
 * Returns `points` triples `x, approximate, exact` flattened into one array,
 * with `x` spanning `[0, upper limit]`.
 */
export function residual_curve(distribution: string, points: number): Float64Array;

/**
 * One replication of a two-facility network (10 minutes to the home
 * facility, 20 to the other). The first half of `days` is warm-up.
 *
 * Returns `name,value` lines: utilizations, waits, LOS and MAPE per
 * facility, then disparities and the share diverted.
 */
export function simulate(interarrival_1: number, interarrival_2: number, p_ncd: number, policy: string, term: string, days: number, seed: bigint): string;

/**
 * Station keys in the order the array arguments use.
 */
export function station_order(): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly los_vs_travel: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly residual_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: bigint) => [number, number, number, number];
    readonly station_order: () => [number, number];
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
