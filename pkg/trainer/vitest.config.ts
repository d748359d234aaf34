import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    testTimeout: 900_000,
    hookTimeout: 900_000,
    // the training tests are CPU-bound and share dataset fixtures; one file
    // at a time keeps wall time predictable on a single core
    fileParallelism: false,
  },
});
