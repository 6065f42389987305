/* tslint:disable */
/* eslint-disable */

/**
 * Planted-factor playground. `strengths` lists one loading per factor
 * (traits assigned in O, C, E, A, N order), each factor gets `items_per_factor`
 * items, and `noise_items` weak items load 0.2 on every factor.
 */
export function factor_explore(seed: number, strengths: string, items_per_factor: number, noise_items: number, threshold: number): string;

/**
 * Weighted kappa between two comma- or space-separated rating lists, plus the
 * 5x5 contingency table.
 */
export function kappa_explore(x: string, y: string, quadratic: boolean): string;

/**
 * The system prompt for one persona, trait and level (1-5).
 */
export function profile_prompt(persona: string, trait_name: string, level: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly factor_explore: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly kappa_explore: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly profile_prompt: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
