/// <reference types="vitest/config" />
import { defineConfig } from "vite";

// The dev server proxies /api to a locally running `tods serve`, so the UI
// can be developed against the real backend without CORS setup.
export default defineConfig({
  server: {
    proxy: {
      "/api": "http://127.0.0.1:8000",
    },
  },
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
  },
});
