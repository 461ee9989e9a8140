import { defineConfig } from "vitest/config";

// The e2e run spawns the Python service and command line pipeline, so it
// is kept out of the default `npm test` and given generous timeouts.
export default defineConfig({
  test: {
    include: ["e2e/**/*.e2e.ts"],
    testTimeout: 240_000,
    hookTimeout: 240_000,
  },
});
