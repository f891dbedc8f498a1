// Public API of the learning harness.
export * from "./rng.js";
export * from "./ndjson.js";
export * from "./client.js";
export * from "./mlp.js";
export * from "./ppo.js";
export * from "./forest.js";
export * from "./data.js";
export * from "./clone.js";
