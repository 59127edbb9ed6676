/** Arcball drag rotations and a rate-limited request coalescer. */

export type Mat3 = number[][];

export function identity3(): Mat3 {
  return [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
  ];
}

export function multiply3(a: Mat3, b: Mat3): Mat3 {
  const out = identity3();
  for (let i = 0; i < 3; i++)
    for (let j = 0; j < 3; j++)
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return out;
}

/** Map normalized screen coordinates in [-1, 1]^2 onto the arcball sphere. */
export function arcballVector(x: number, y: number): [number, number, number] {
  const d2 = x * x + y * y;
  if (d2 <= 1) return [x, y, Math.sqrt(1 - d2)];
  const d = Math.sqrt(d2);
  return [x / d, y / d, 0];
}

/** Rotation carrying arcball point `from` onto `to` (Rodrigues form). */
export function dragRotation(
  from: [number, number, number],
  to: [number, number, number],
): Mat3 {
  const axis = [
    from[1] * to[2] - from[2] * to[1],
    from[2] * to[0] - from[0] * to[2],
    from[0] * to[1] - from[1] * to[0],
  ];
  const s = Math.hypot(axis[0], axis[1], axis[2]);
  const c = from[0] * to[0] + from[1] * to[1] + from[2] * to[2];
  if (s < 1e-12) return identity3();
  const [kx, ky, kz] = [axis[0] / s, axis[1] / s, axis[2] / s];
  const k: Mat3 = [
    [0, -kz, ky],
    [kz, 0, -kx],
    [-ky, kx, 0],
  ];
  const k2 = multiply3(k, k);
  const out = identity3();
  for (let i = 0; i < 3; i++)
    for (let j = 0; j < 3; j++) out[i][j] += s * k[i][j] + (1 - c) * k2[i][j];
  return out;
}

/**
 * Coalesces a stream of incremental rotations into at most `maxPerSecond`
 * flushes. Increments arriving between flushes are composed, so the server
 * sees one combined rotation per tick and no motion is lost.
 */
export class RotationCoalescer {
  private pending: Mat3 | null = null;
  private lastFlush = -Infinity;
  private flushCount = 0;

  constructor(
    private send: (matrix: Mat3) => void,
    private maxPerSecond = 20,
    private now: () => number = () => Date.now(),
  ) {}

  /** Queue one incremental rotation; flushes immediately if the rate allows. */
  push(increment: Mat3): void {
    this.pending = this.pending === null ? increment : multiply3(increment, this.pending);
    this.maybeFlush();
  }

  /** Called on a timer (or pointer-up) to drain anything still pending. */
  tick(): void {
    this.maybeFlush();
  }

  /** Number of requests actually sent. */
  get sent(): number {
    return this.flushCount;
  }

  get hasPending(): boolean {
    return this.pending !== null;
  }

  private maybeFlush(): void {
    if (this.pending === null) return;
    const t = this.now();
    if (t - this.lastFlush < 1000 / this.maxPerSecond) return;
    const matrix = this.pending;
    this.pending = null;
    this.lastFlush = t;
    this.flushCount += 1;
    this.send(matrix);
  }
}
