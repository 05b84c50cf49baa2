/* tslint:disable */
/* eslint-disable */

/**
 * A dialog session over one of the dialog presets.
 */
export class Dialog {
    free(): void;
    [Symbol.dispose](): void;
    answer(text: string): string;
    /**
     * `time` may be empty; `uniform` drops the commonsense prior.
     */
    constructor(scenario_name: string, time: string, uniform: boolean);
    /**
     * Current question or delivery as JSON.
     */
    state(): string;
}

/**
 * Policy actions on a triangular grid of room beliefs, as JSON
 * `[{belief: [p0, p1, p2], action}]`.
 */
export function policy_map(scenario_name: string, item: string, person: string, resolution: number): string;

/**
 * Probability of `query` under `program`. Each evidence line is either
 * `obs(lit)` or `do(lit)`. Returns JSON with the possible worlds too.
 */
export function query(program: string, query: string, evidence: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_dialog_free: (a: number, b: number) => void;
    readonly dialog_answer: (a: number, b: number, c: number) => [number, number, number, number];
    readonly dialog_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly dialog_state: (a: number) => [number, number, number, number];
    readonly policy_map: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly query: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
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
