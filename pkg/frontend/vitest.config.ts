import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    globalSetup: ["tests/global_setup.ts"],
    // One shared node serves all suites; its handlers are synchronous, so
    // run files one at a time rather than racing mutations against it.
    fileParallelism: false,
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
