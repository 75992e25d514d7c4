/* @ts-self-types="./sfa_demo.d.ts" */

/**
 * Closed-form costs for a `(d, k)` budget under fp16/int8/int32 storage.
 */
export class CostSummary {
    static __wrap(ptr) {
        const obj = Object.create(CostSummary.prototype);
        obj.__wbg_ptr = ptr;
        CostSummaryFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        CostSummaryFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_costsummary_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get context_extension() {
        const ret = wasm.__wbg_get_costsummary_context_extension(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get flop_ratio() {
        const ret = wasm.__wbg_get_costsummary_flop_ratio(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get key_memory_ratio() {
        const ret = wasm.__wbg_get_costsummary_key_memory_ratio(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get kv_reduction() {
        const ret = wasm.__wbg_get_costsummary_kv_reduction(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {boolean}
     */
    get memory_gain() {
        const ret = wasm.__wbg_get_costsummary_memory_gain(this.__wbg_ptr);
        return ret !== 0;
    }
    /**
     * @param {number} arg0
     */
    set context_extension(arg0) {
        wasm.__wbg_set_costsummary_context_extension(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set flop_ratio(arg0) {
        wasm.__wbg_set_costsummary_flop_ratio(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set key_memory_ratio(arg0) {
        wasm.__wbg_set_costsummary_key_memory_ratio(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set kv_reduction(arg0) {
        wasm.__wbg_set_costsummary_kv_reduction(this.__wbg_ptr, arg0);
    }
    /**
     * @param {boolean} arg0
     */
    set memory_gain(arg0) {
        wasm.__wbg_set_costsummary_memory_gain(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) CostSummary.prototype[Symbol.dispose] = CostSummary.prototype.free;

/**
 * Row-major attention weights of one instance plus its overlap count.
 */
export class Heatmap {
    static __wrap(ptr) {
        const obj = Object.create(Heatmap.prototype);
        obj.__wbg_ptr = ptr;
        HeatmapFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        HeatmapFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_heatmap_free(ptr, 0);
    }
    /**
     * Query/key feature overlaps in this instance.
     * @returns {bigint}
     */
    get edges() {
        const ret = wasm.heatmap_edges(this.__wbg_ptr);
        return BigInt.asUintN(64, ret);
    }
    /**
     * @returns {number}
     */
    get n() {
        const ret = wasm.heatmap_n(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * `n^2 k^2 / d` for the same shape.
     * @returns {bigint}
     */
    get predicted() {
        const ret = wasm.heatmap_predicted(this.__wbg_ptr);
        return BigInt.asUintN(64, ret);
    }
    /**
     * `n * n` weights, row `i` holding query `i`'s distribution over keys.
     * @returns {Float64Array}
     */
    weights() {
        const ret = wasm.heatmap_weights(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
}
if (Symbol.dispose) Heatmap.prototype[Symbol.dispose] = Heatmap.prototype.free;

/**
 * @param {number} n
 * @param {number} d
 * @param {number} k
 * @param {boolean} causal
 * @param {bigint} seed
 * @returns {Heatmap}
 */
export function attention_heatmap(n, d, k, causal, seed) {
    const ret = wasm.attention_heatmap(n, d, k, causal, seed);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Heatmap.__wrap(ret[0]);
}

/**
 * @param {number} d
 * @param {number} k
 * @param {number} d_v
 * @returns {CostSummary}
 */
export function cost_model(d, k, d_v) {
    const ret = wasm.cost_model(d, k, d_v);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return CostSummary.__wrap(ret[0]);
}

/**
 * @param {number} n
 * @param {number} d
 * @param {number} k
 * @param {boolean} fixed
 * @param {bigint} seed
 * @returns {number}
 */
export function selection_entropy(n, d, k, fixed, seed) {
    const ret = wasm.selection_entropy(n, d, k, fixed, seed);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return ret[0];
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./sfa_demo_bg.js": import0,
    };
}

const CostSummaryFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_costsummary_free(ptr, 1));
const HeatmapFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_heatmap_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('sfa_demo_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
