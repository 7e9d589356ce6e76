/** Exact "p/q" fractions on bigints: the server speaks rational strings and
 *  the client must never lose precision before submitting a move. */

export interface Frac {
  readonly n: bigint;
  readonly d: bigint;
}

function gcd(a: bigint, b: bigint): bigint {
  a = a < 0n ? -a : a;
  b = b < 0n ? -b : b;
  while (b) {
    [a, b] = [b, a % b];
  }
  return a;
}

export function frac(n: bigint | number, d: bigint | number = 1n): Frac {
  let nn = BigInt(n);
  let dd = BigInt(d);
  if (dd === 0n) throw new Error("zero denominator");
  if (dd < 0n) {
    nn = -nn;
    dd = -dd;
  }
  const g = gcd(nn, dd) || 1n;
  return { n: nn / g, d: dd / g };
}

export function parseFrac(s: string): Frac {
  const [p, q] = s.split("/");
  return frac(BigInt(p), q === undefined ? 1n : BigInt(q));
}

export function fracStr(x: Frac): string {
  return `${x.n}/${x.d}`;
}

export function add(a: Frac, b: Frac): Frac {
  return frac(a.n * b.d + b.n * a.d, a.d * b.d);
}

export function sub(a: Frac, b: Frac): Frac {
  return frac(a.n * b.d - b.n * a.d, a.d * b.d);
}

export function mul(a: Frac, b: Frac): Frac {
  return frac(a.n * b.n, a.d * b.d);
}

export function cmp(a: Frac, b: Frac): number {
  const lhs = a.n * b.d;
  const rhs = b.n * a.d;
  return lhs < rhs ? -1 : lhs > rhs ? 1 : 0;
}

export function toNumber(x: Frac): number {
  return Number(x.n) / Number(x.d);
}

/** Snap a float (pointer position) onto the dyadic rational grid at the
 *  current zoom, so every submitted coordinate is exact. */
export function snapToGrid(x: number, gridBits: number): Frac {
  const scale = 2 ** gridBits;
  return frac(BigInt(Math.round(x * scale)), BigInt(scale));
}
