import assert from "node:assert/strict";
import { test } from "node:test";

import { add, cmp, frac, fracStr, mul, parseFrac, snapToGrid, sub, toNumber }
  from "../src/frac.js";

test("parse and print round trip", () => {
  assert.equal(fracStr(parseFrac("3/4")), "3/4");
  assert.equal(fracStr(parseFrac("7")), "7/1");
  assert.equal(fracStr(parseFrac("-6/8")), "-3/4");
});

test("arithmetic is exact", () => {
  const a = parseFrac("1/3");
  const b = parseFrac("1/6");
  assert.equal(fracStr(add(a, b)), "1/2");
  assert.equal(fracStr(sub(a, b)), "1/6");
  assert.equal(fracStr(mul(a, b)), "1/18");
  assert.equal(cmp(a, b), 1);
  assert.equal(cmp(a, parseFrac("2/6")), 0);
});

test("huge denominators survive", () => {
  const big = parseFrac("123456789012345678901/987654321098765432109");
  assert.equal(cmp(add(big, frac(0n)), big), 0);
  assert.ok(Math.abs(toNumber(big) - 0.125) < 0.01);
});

test("pointer snapping lands on the dyadic grid", () => {
  const snapped = snapToGrid(0.333333, 8);
  assert.equal(Number(snapped.d) <= 256, true);
});
