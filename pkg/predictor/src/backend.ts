/** Backend selection: WASM when its kernels load, plain CPU otherwise. */

import * as tf from "@tensorflow/tfjs";

let initialized: Promise<string> | null = null;

export function initBackend(prefer: "wasm" | "cpu" = "wasm"): Promise<string> {
  if (!initialized) {
    initialized = (async () => {
      if (prefer === "wasm") {
        try {
          require("@tensorflow/tfjs-backend-wasm");
          if (await tf.setBackend("wasm")) {
            await tf.ready();
            return tf.getBackend();
          }
        } catch {
          // fall through to cpu
        }
      }
      await tf.setBackend("cpu");
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return initialized;
}
