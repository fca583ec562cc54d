/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const frame_info: () => [number, number];
export const project: (a: number, b: number) => [number, number, number, number];
export const smooth_profile: (a: number, b: number, c: number) => [number, number, number, number];
export const stack_markers: (a: number, b: number, c: number) => [number, number, number, number];
export const unproject: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
