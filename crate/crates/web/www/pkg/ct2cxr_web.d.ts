/* tslint:disable */
/* eslint-disable */

/**
 * Browser handle around a [`Scene`].
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Cardiothoracic ratio, or NaN when it cannot be measured.
     */
    ctr(): number;
    /**
     * Heart half-width and scoliosis amplitude are in voxels of a 256^3
     * phantom and scale with `size`.
     */
    constructor(size: number, heart_half_width: number, scoliosis_amplitude: number);
    /**
     * RGBA frontal radiograph with masks and measurements drawn on top.
     */
    overlay(bone_weight: number, equalize: boolean): Uint8Array;
    /**
     * RGBA pseudo-radiograph; `lateral` picks the side view.
     */
    radiograph(lateral: boolean, bone_weight: number, equalize: boolean): Uint8Array;
    /**
     * Spine-center distance in pixels, or NaN.
     */
    scd(): number;
    /**
     * RGBA slice with the above-threshold body voxels tinted.
     */
    slice_image(index: number, nu: number, tau: number, kappa: number, omega: number): Uint8Array;
    /**
     * Threshold of one axial slice; `nu = Infinity, tau = 0` is Otsu.
     */
    slice_threshold(index: number, nu: number, tau: number, kappa: number, omega: number): number;
    readonly side: number;
    readonly slices: number;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_ctr: (a: number) => number;
    readonly demo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_overlay: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_radiograph: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_scd: (a: number) => number;
    readonly demo_side: (a: number) => number;
    readonly demo_slice_image: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demo_slice_threshold: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly demo_slices: (a: number) => number;
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
