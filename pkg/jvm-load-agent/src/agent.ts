import * as fs from "node:fs";
import * as path from "node:path";

import { ClassPrepareEvent, JdwpClient } from "./client.js";

/** Parsed agent argument string. */
export interface AgentConfig {
  outputPath: string;
  flushOnExit: boolean;
}

/**
 * Parse the agent argument string, e.g. "out=load.log" or
 * "out=load.log,flush=off".
 */
export function parseAgentArgs(args: string): AgentConfig {
  let outputPath = "";
  let flushOnExit = true;
  for (const part of args.split(",")) {
    if (!part.trim()) {
      continue;
    }
    const eq = part.indexOf("=");
    const key = (eq < 0 ? part : part.slice(0, eq)).trim();
    const value = eq < 0 ? "" : part.slice(eq + 1).trim();
    switch (key) {
      case "out":
        outputPath = value;
        break;
      case "flush":
        flushOnExit = value !== "off" && value !== "false";
        break;
      default:
        throw new Error(`unknown agent option: ${key}`);
    }
  }
  if (!outputPath) {
    throw new Error('agent arguments must include "out=<path>"');
  }
  return { outputPath, flushOnExit };
}

/** One observed class load. */
export interface LoadRecord {
  className: string;
  origin: string;
}

/** Class type signature ("Lcom/foo/Bar;") to binary name ("com.foo.Bar"). */
export function signatureToBinaryName(signature: string): string {
  if (!signature.startsWith("L") || !signature.endsWith(";") || signature.length < 3) {
    throw new Error(`not a class signature: ${signature}`);
  }
  return signature.slice(1, -1).replaceAll("/", ".");
}

export function formatLogLine(record: LoadRecord): string {
  return `[class,load] ${record.className} source: ${record.origin}`;
}

/**
 * Collects class loads reported by the VM and writes the load log.
 *
 * The recorder never throws into its caller: a failing event handler is
 * counted and swallowed so the observed application can never be broken by
 * observation. Class bytes are never touched; this is a pure listener.
 */
export class LoadRecorder {
  private readonly seen = new Set<string>();
  private readonly records: LoadRecord[] = [];
  private errors = 0;

  get errorCount(): number {
    return this.errors;
  }

  get size(): number {
    return this.records.length;
  }

  /** Record one load; duplicates by class name collapse to the first. */
  onClassLoad(className: string, origin: string = "unknown"): void {
    try {
      if (!className) {
        throw new Error("empty class name");
      }
      if (this.seen.has(className)) {
        return;
      }
      this.seen.add(className);
      this.records.push({ className, origin });
    } catch {
      this.errors += 1;
    }
  }

  /** Record a raw prepare event; malformed signatures count as errors. */
  onClassPrepare(event: ClassPrepareEvent, origin: string = "unknown"): void {
    try {
      this.onClassLoad(signatureToBinaryName(event.signature), origin);
    } catch {
      this.errors += 1;
    }
  }

  noteError(): void {
    this.errors += 1;
  }

  /** Render the unified load-log text, one line per first-seen class. */
  render(): string {
    return this.records.map((r) => formatLogLine(r) + "\n").join("");
  }

  /**
   * Write the log file. Failures are reported on stderr and swallowed:
   * flushing must never take the host down with it.
   */
  flush(outputPath: string): boolean {
    try {
      fs.mkdirSync(path.dirname(path.resolve(outputPath)), { recursive: true });
      fs.writeFileSync(outputPath, this.render());
      return true;
    } catch (error) {
      process.stderr.write(`jvm-load-agent: cannot write ${outputPath}: ${String(error)}\n`);
      return false;
    }
  }
}

export interface AgentRunResult {
  classesRecorded: number;
  errorCount: number;
  flushed: boolean;
}

/**
 * Attach to a VM's debug port, record every class load until the VM dies
 * or the connection drops, then flush the log.
 *
 * Attaching before the application starts (suspend=y on the VM side) gives
 * the complete load history; attaching late only sees subsequent loads.
 */
export async function runAgent(
  host: string,
  port: number,
  config: AgentConfig,
  client: JdwpClient = new JdwpClient(),
): Promise<AgentRunResult> {
  const recorder = new LoadRecorder();
  const finished = new Promise<void>((resolve) => {
    let done = false;
    const complete = () => {
      if (!done) {
        done = true;
        resolve();
      }
    };
    client.on("vmDeath", complete);
    client.on("closed", complete);
  });

  client.on("classPrepare", (event: ClassPrepareEvent) => recorder.onClassPrepare(event));
  client.on("protocolError", () => recorder.noteError());

  await client.connect(host, port);
  await client.readIdSizes();
  await client.requestClassPrepareEvents();
  await client.resume();
  await finished;
  client.close();

  const flushed = config.flushOnExit ? recorder.flush(config.outputPath) : true;
  return { classesRecorded: recorder.size, errorCount: recorder.errorCount, flushed };
}
