/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_costsummary_free: (a: number, b: number) => void;
export const __wbg_get_costsummary_context_extension: (a: number) => number;
export const __wbg_get_costsummary_flop_ratio: (a: number) => number;
export const __wbg_get_costsummary_key_memory_ratio: (a: number) => number;
export const __wbg_get_costsummary_kv_reduction: (a: number) => number;
export const __wbg_get_costsummary_memory_gain: (a: number) => number;
export const __wbg_heatmap_free: (a: number, b: number) => void;
export const __wbg_set_costsummary_context_extension: (a: number, b: number) => void;
export const __wbg_set_costsummary_flop_ratio: (a: number, b: number) => void;
export const __wbg_set_costsummary_key_memory_ratio: (a: number, b: number) => void;
export const __wbg_set_costsummary_kv_reduction: (a: number, b: number) => void;
export const __wbg_set_costsummary_memory_gain: (a: number, b: number) => void;
export const attention_heatmap: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const cost_model: (a: number, b: number, c: number) => [number, number, number];
export const heatmap_edges: (a: number) => bigint;
export const heatmap_n: (a: number) => number;
export const heatmap_predicted: (a: number) => bigint;
export const heatmap_weights: (a: number) => [number, number];
export const selection_entropy: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
