// Client for the env server's line protocol. One session per process or
// socket; requests go out one at a time and every line back answers the
// oldest pending request, so a plain FIFO of resolvers is enough.

import { spawn } from "node:child_process";
import net from "node:net";
import { LineSplitter, encodeLine } from "./ndjson.js";

export interface StepInfo {
  fitness: number;
  slot: number;
  violation: string | null;
}

export interface Reply {
  ok: boolean;
  obs?: number[];
  reward?: number;
  done?: boolean;
  info?: StepInfo;
  error?: string;
}

export interface StepOutcome {
  obs: number[];
  reward: number;
  done: boolean;
  info: StepInfo;
}

/** Scenario knobs accepted by the server's config command. */
export interface EnvScenario {
  rule?: 1 | 2 | 3;
  randomize?: "Fixed" | "Randomized";
  fixedInitials?: number[][];
  fixedJammer?: [number, number];
  rewardScale?: number;
  jammerXRange?: [number, number];
  jammerYRange?: [number, number];
}

/** The surface trainers depend on; tests swap in synthetic envs behind it. */
export interface EnvLike {
  configure(scenario: EnvScenario): Promise<void>;
  reset(seed: number): Promise<number[]>;
  step(action: ArrayLike<number>): Promise<StepOutcome>;
  close(): Promise<void>;
}

export class ProtocolError extends Error {
  constructor(readonly code: string) {
    super(`env server refused the request: ${code}`);
    this.name = "ProtocolError";
  }
}

interface Waiter {
  resolve: (reply: Reply) => void;
  reject: (err: Error) => void;
}

export class EnvClient implements EnvLike {
  /** When true, every request/reply line is kept for later replay. */
  recordTranscript = false;
  readonly sentLines: string[] = [];
  readonly receivedLines: string[] = [];

  private readonly splitter = new LineSplitter();
  private readonly waiters: Waiter[] = [];
  private closed = false;

  private constructor(
    private readonly write: (line: string) => void,
    private readonly shutdown: () => Promise<void>,
  ) {}

  /** Spawn the server as a child process and talk over its stdio. */
  static spawnStdio(command = "nullsteer", args: string[] = ["serve"]): EnvClient {
    const child = spawn(command, args, { stdio: ["pipe", "pipe", "inherit"] });
    const exited = new Promise<void>((resolve) => {
      child.once("exit", () => resolve());
    });
    const client = new EnvClient(
      (line) => {
        child.stdin.write(line);
      },
      async () => {
        child.stdin.end();
        const timeout = setTimeout(() => child.kill(), 5000);
        await exited;
        clearTimeout(timeout);
      },
    );
    child.stdout.on("data", (chunk: Buffer) => client.onData(chunk));
    child.once("error", (err) => client.fail(new Error(`env server failed to start: ${err.message}`)));
    child.once("exit", (code) => {
      if (!client.closed) {
        client.fail(new Error(`env server exited early (code ${code})`));
      }
    });
    return client;
  }

  /** Connect to a server already listening on TCP. */
  static connectTcp(host: string, port: number): Promise<EnvClient> {
    return new Promise((resolve, reject) => {
      const sock = net.connect({ host, port }, () => resolve(client));
      sock.setNoDelay(true);
      const client = new EnvClient(
        (line) => {
          sock.write(line);
        },
        () =>
          new Promise<void>((done) => {
            sock.end();
            sock.once("close", () => done());
            setTimeout(() => {
              sock.destroy();
              done();
            }, 5000).unref();
          }),
      );
      sock.on("data", (chunk: Buffer) => client.onData(chunk));
      sock.once("error", (err) => {
        client.fail(new Error(`env endpoint unreachable: ${err.message}`));
        reject(err);
      });
      sock.once("close", () => {
        if (!client.closed) client.fail(new Error("env server closed the connection"));
      });
    });
  }

  private onData(chunk: Buffer): void {
    for (const line of this.splitter.push(chunk)) {
      if (this.recordTranscript) this.receivedLines.push(line);
      const waiter = this.waiters.shift();
      if (!waiter) continue; // unsolicited line; the protocol never does this
      let reply: Reply;
      try {
        reply = JSON.parse(line) as Reply;
      } catch {
        waiter.reject(new Error(`env server sent a non-JSON line: ${line}`));
        continue;
      }
      waiter.resolve(reply);
    }
  }

  private fail(err: Error): void {
    this.closed = true;
    while (this.waiters.length > 0) this.waiters.shift()!.reject(err);
  }

  /** Send one command and wait for its reply, ok or not. */
  request(msg: Record<string, unknown>): Promise<Reply> {
    if (this.closed) return Promise.reject(new Error("client is closed"));
    const line = encodeLine(msg);
    if (this.recordTranscript) this.sentLines.push(line.trimEnd());
    return new Promise<Reply>((resolve, reject) => {
      this.waiters.push({ resolve, reject });
      this.write(line);
    });
  }

  /** Replay a previously recorded request line byte-for-byte. */
  requestRaw(line: string): Promise<Reply> {
    if (this.closed) return Promise.reject(new Error("client is closed"));
    if (this.recordTranscript) this.sentLines.push(line);
    return new Promise<Reply>((resolve, reject) => {
      this.waiters.push({ resolve, reject });
      this.write(line + "\n");
    });
  }

  async configure(scenario: EnvScenario): Promise<void> {
    const msg: Record<string, unknown> = { cmd: "config" };
    if (scenario.rule !== undefined) msg.rule = scenario.rule;
    if (scenario.randomize !== undefined) msg.randomize = scenario.randomize;
    if (scenario.fixedInitials !== undefined) msg.fixed_initials = scenario.fixedInitials;
    if (scenario.fixedJammer !== undefined) msg.fixed_jammer = scenario.fixedJammer;
    if (scenario.rewardScale !== undefined) msg.reward_scale = scenario.rewardScale;
    if (scenario.jammerXRange !== undefined) msg.jammer_x_range = scenario.jammerXRange;
    if (scenario.jammerYRange !== undefined) msg.jammer_y_range = scenario.jammerYRange;
    expectOk(await this.request(msg));
  }

  async reset(seed: number): Promise<number[]> {
    const reply = expectOk(await this.request({ cmd: "reset", seed }));
    if (!reply.obs) throw new Error("reset reply carried no observation");
    return reply.obs;
  }

  async step(action: ArrayLike<number>): Promise<StepOutcome> {
    const reply = expectOk(await this.request({ cmd: "step", action: Array.from(action) }));
    if (!reply.obs || reply.reward === undefined || reply.done === undefined || !reply.info) {
      throw new Error("step reply was missing fields");
    }
    return { obs: reply.obs, reward: reply.reward, done: reply.done, info: reply.info };
  }

  async close(): Promise<void> {
    if (this.closed) return;
    try {
      await this.request({ cmd: "close" });
    } finally {
      this.closed = true;
      await this.shutdown();
    }
  }
}

export function expectOk(reply: Reply): Reply {
  if (!reply.ok) throw new ProtocolError(reply.error ?? "unknown");
  return reply;
}

/**
 * Swarm size implied by an observation vector. The layout is 2N position
 * values, 2 jammer offsets, 1 slot index, and N(N-1)/2 pairwise link
 * capacities, so the length pins N exactly.
 */
export function swarmSizeFromObs(obsLen: number): number {
  const n = (-3 + Math.sqrt(8 * obsLen - 15)) / 2;
  const rounded = Math.round(n);
  if (rounded < 1 || 2 * rounded + 3 + (rounded * (rounded - 1)) / 2 !== obsLen) {
    throw new Error(`observation length ${obsLen} fits no swarm size`);
  }
  return rounded;
}

/**
 * Open an env endpoint. Formats: undefined/"" spawns the default local
 * server, "tcp://host:port" connects to a listener, anything else is run
 * as a command line (first word the binary, the rest its arguments).
 */
export async function openEndpoint(endpoint?: string): Promise<EnvClient> {
  if (!endpoint || endpoint === "stdio") return EnvClient.spawnStdio();
  const tcp = /^tcp:\/\/([^:]+):(\d+)$/.exec(endpoint);
  if (tcp) return EnvClient.connectTcp(tcp[1], Number(tcp[2]));
  const words = endpoint.split(/\s+/).filter((w) => w.length > 0);
  return EnvClient.spawnStdio(words[0], words.slice(1));
}
