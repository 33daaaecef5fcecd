/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demotrainer_free: (a: number, b: number) => void;
export const __wbg_field_free: (a: number, b: number) => void;
export const demotrainer_epoch: (a: number) => number;
export const demotrainer_loss: (a: number) => number;
export const demotrainer_new: (a: bigint, b: number, c: number, d: number, e: number) => [number, number, number];
export const demotrainer_predict: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const demotrainer_relative_error: (a: number, b: number) => [number, number, number];
export const demotrainer_train: (a: number, b: number) => [number, number, number];
export const field_j: (a: number) => [number, number];
export const field_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const field_pressure: (a: number, b: number) => [number, number, number, number];
export const field_settlement: (a: number, b: number) => [number, number, number, number];
export const field_t: (a: number) => [number, number];
export const field_x: (a: number) => [number, number];
export const material_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
