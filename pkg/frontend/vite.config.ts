import { defineConfig } from "vitest/config";

export default defineConfig({
  // The UI is served by the explanation service itself (static_dir) or the
  // vite dev server with the API proxied to a locally running service.
  server: {
    proxy: {
      "/explain": "http://127.0.0.1:8000",
      "/compare": "http://127.0.0.1:8000",
      "/jobs": "http://127.0.0.1:8000",
      "/engines": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
