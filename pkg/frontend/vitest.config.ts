import { defineConfig } from "vitest/config";

// Single-core sandbox: run files one at a time so env-server integration
// tests and training runs don't fight each other for the CPU.
export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    fileParallelism: false,
    testTimeout: 180_000,
    hookTimeout: 180_000,
  },
});
