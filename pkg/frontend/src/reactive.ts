/** Debounced recomputation loop.
 *
 * Every parameter edit calls schedule(); after the quiet period exactly one
 * run fires. A run superseding an in-flight one aborts the older request, so
 * the newest configuration always wins and no request storm builds up.
 */

export const DEBOUNCE_MS = 400;

export class ReactiveRunner {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private controller: AbortController | null = null;
  private generation = 0;

  constructor(private run: (signal: AbortSignal) => Promise<void>,
              private delay: number = DEBOUNCE_MS) {}

  schedule(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fire();
    }, this.delay);
  }

  private fire(): void {
    if (this.controller !== null) {
      this.controller.abort();
    }
    const controller = new AbortController();
    this.controller = controller;
    const generation = ++this.generation;
    this.run(controller.signal).catch((err) => {
      if (generation === this.generation && (err as Error).name !== "AbortError") {
        throw err;
      }
    });
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.controller !== null) {
      this.controller.abort();
      this.controller = null;
    }
  }
}
