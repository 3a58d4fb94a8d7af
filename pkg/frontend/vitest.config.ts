import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'jsdom',
    globalSetup: './tests/globalSetup.ts',
    testTimeout: 30_000,
    hookTimeout: 180_000,
  },
});
