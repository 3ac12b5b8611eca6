// Debounced, superseding preview requests: slider drags fire many changes,
// only the latest request may update the screen.

export const PREVIEW_DEBOUNCE_MS = 150;

type Send<Req, Res> = (req: Req) => Promise<Res>;
type Apply<Res> = (res: Res) => void;

export class PreviewScheduler<Req, Res> {
  private seq = 0;
  private applied = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: Req | null = null;

  constructor(
    private send: Send<Req, Res>,
    private apply: Apply<Res>,
    private onError: (err: unknown) => void = () => undefined,
    private debounceMs: number = PREVIEW_DEBOUNCE_MS,
  ) {}

  /** Queue a preview; earlier queued-but-unsent requests are dropped. */
  update(req: Req): void {
    this.pending = req;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => this.fire(), this.debounceMs);
  }

  /** Send immediately (initial render, frame change). */
  updateNow(req: Req): void {
    this.pending = req;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.fire();
  }

  private fire(): void {
    if (this.pending === null) return;
    const req = this.pending;
    this.pending = null;
    this.timer = null;
    const ticket = ++this.seq;
    this.send(req).then(
      (res) => {
        if (ticket > this.applied) {
          this.applied = ticket; // stale responses (ticket <= applied) are discarded
          this.apply(res);
        }
      },
      (err) => {
        if (ticket > this.applied) this.onError(err);
      },
    );
  }
}
