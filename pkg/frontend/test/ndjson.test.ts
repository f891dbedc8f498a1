import { describe, expect, test } from "vitest";
import { LineSplitter, decodeLine, encodeLine } from "../src/ndjson.js";

describe("line framing", () => {
  test("reassembles lines split across chunks", () => {
    const s = new LineSplitter();
    expect(s.push('{"a"')).toEqual([]);
    expect(s.push(':1}\n{"b":2}\n{"c"')).toEqual(['{"a":1}', '{"b":2}']);
    expect(s.push(":3}\n")).toEqual(['{"c":3}']);
    expect(s.flush()).toBeNull();
  });

  test("handles several lines in one chunk and skips blanks", () => {
    const s = new LineSplitter();
    expect(s.push("one\n\ntwo\n\n\nthree\n")).toEqual(["one", "two", "three"]);
  });

  test("strips carriage returns", () => {
    const s = new LineSplitter();
    expect(s.push("x\r\ny\r\n")).toEqual(["x", "y"]);
  });

  test("flush returns an unterminated tail once", () => {
    const s = new LineSplitter();
    s.push("partial");
    expect(s.flush()).toBe("partial");
    expect(s.flush()).toBeNull();
  });

  test("encode/decode round-trips an object", () => {
    const line = encodeLine({ cmd: "step", action: [0.25, -1] });
    expect(line.endsWith("\n")).toBe(true);
    expect(decodeLine(line.trimEnd())).toEqual({ cmd: "step", action: [0.25, -1] });
  });
});
