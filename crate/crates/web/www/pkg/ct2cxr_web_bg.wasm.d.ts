/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const demo_ctr: (a: number) => number;
export const demo_new: (a: number, b: number, c: number) => [number, number, number];
export const demo_overlay: (a: number, b: number, c: number) => [number, number, number, number];
export const demo_radiograph: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const demo_scd: (a: number) => number;
export const demo_side: (a: number) => number;
export const demo_slice_image: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const demo_slice_threshold: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const demo_slices: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
