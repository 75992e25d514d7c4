/* tslint:disable */
/* eslint-disable */

/**
 * Closed-form costs for a `(d, k)` budget under fp16/int8/int32 storage.
 */
export class CostSummary {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    context_extension: number;
    flop_ratio: number;
    key_memory_ratio: number;
    kv_reduction: number;
    memory_gain: boolean;
}

/**
 * Row-major attention weights of one instance plus its overlap count.
 */
export class Heatmap {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `n * n` weights, row `i` holding query `i`'s distribution over keys.
     */
    weights(): Float64Array;
    /**
     * Query/key feature overlaps in this instance.
     */
    readonly edges: bigint;
    readonly n: number;
    /**
     * `n^2 k^2 / d` for the same shape.
     */
    readonly predicted: bigint;
}

export function attention_heatmap(n: number, d: number, k: number, causal: boolean, seed: bigint): Heatmap;

export function cost_model(d: number, k: number, d_v: number): CostSummary;

export function selection_entropy(n: number, d: number, k: number, fixed: boolean, seed: bigint): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_costsummary_free: (a: number, b: number) => void;
    readonly __wbg_get_costsummary_context_extension: (a: number) => number;
    readonly __wbg_get_costsummary_flop_ratio: (a: number) => number;
    readonly __wbg_get_costsummary_key_memory_ratio: (a: number) => number;
    readonly __wbg_get_costsummary_kv_reduction: (a: number) => number;
    readonly __wbg_get_costsummary_memory_gain: (a: number) => number;
    readonly __wbg_heatmap_free: (a: number, b: number) => void;
    readonly __wbg_set_costsummary_context_extension: (a: number, b: number) => void;
    readonly __wbg_set_costsummary_flop_ratio: (a: number, b: number) => void;
    readonly __wbg_set_costsummary_key_memory_ratio: (a: number, b: number) => void;
    readonly __wbg_set_costsummary_kv_reduction: (a: number, b: number) => void;
    readonly __wbg_set_costsummary_memory_gain: (a: number, b: number) => void;
    readonly attention_heatmap: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly cost_model: (a: number, b: number, c: number) => [number, number, number];
    readonly heatmap_edges: (a: number) => bigint;
    readonly heatmap_n: (a: number) => number;
    readonly heatmap_predicted: (a: number) => bigint;
    readonly heatmap_weights: (a: number) => [number, number];
    readonly selection_entropy: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
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
