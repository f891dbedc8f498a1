// Newline-delimited JSON framing. The env server speaks one JSON object per
// line; chunks off a pipe can split or merge lines arbitrarily, so decoding
// buffers until each newline arrives.

export class LineSplitter {
  private pending = "";

  /** Feed a chunk; returns the complete lines it finished (sans newline). */
  push(chunk: string | Buffer): string[] {
    this.pending += typeof chunk === "string" ? chunk : chunk.toString("utf8");
    const parts = this.pending.split("\n");
    this.pending = parts.pop() ?? "";
    const out: string[] = [];
    for (const part of parts) {
      const line = part.endsWith("\r") ? part.slice(0, -1) : part;
      if (line.length > 0) out.push(line);
    }
    return out;
  }

  /** Any unterminated trailing data (useful at EOF). */
  flush(): string | null {
    const rest = this.pending;
    this.pending = "";
    return rest.length > 0 ? rest : null;
  }
}

export function encodeLine(obj: unknown): string {
  return JSON.stringify(obj) + "\n";
}

export function decodeLine(line: string): unknown {
  return JSON.parse(line);
}
