import { defineConfig } from "vite";
import react from "@vitejs/plugin-react";

// The built assets are served by the query service at /ui; API calls go to
// the same origin. In dev mode, proxy API routes to a locally running service.
const apiRoutes = ["/sessions", "/indexes", "/traces", "/docs", "/rag", "/plan", "/plan-schema", "/health"];

export default defineConfig({
  plugins: [react()],
  base: "./",
  server: {
    proxy: Object.fromEntries(apiRoutes.map((route) => [route, "http://127.0.0.1:8600"])),
  },
  test: {
    environment: "jsdom",
    globals: false,
    include: ["tests/**/*.test.ts", "tests/**/*.test.tsx"],
  },
});
