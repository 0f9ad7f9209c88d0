#!/usr/bin/env node
import { parseAgentArgs, runAgent } from "./agent.js";

const USAGE = `usage: jvm-load-agent <host:port> out=<path>[,flush=off]

Attaches to a JVM started with
  -agentlib:jdwp=transport=dt_socket,server=y,suspend=y,address=<port>
records every class the VM loads, and writes a load log at VM exit.
Feed the log to the introspection tooling to recover the set of
dependencies the run actually used.`;

function parseEndpoint(text: string): { host: string; port: number } {
  const sep = text.lastIndexOf(":");
  const host = sep < 0 ? "localhost" : text.slice(0, sep) || "localhost";
  const port = Number.parseInt(sep < 0 ? text : text.slice(sep + 1), 10);
  if (!Number.isInteger(port) || port <= 0 || port > 65535) {
    throw new Error(`invalid endpoint: ${text}`);
  }
  return { host, port };
}

async function main(argv: string[]): Promise<number> {
  if (argv.length !== 2 || argv.includes("--help") || argv.includes("-h")) {
    process.stderr.write(USAGE + "\n");
    return argv.includes("--help") || argv.includes("-h") ? 0 : 2;
  }
  try {
    const endpoint = parseEndpoint(argv[0]);
    const config = parseAgentArgs(argv[1]);
    const result = await runAgent(endpoint.host, endpoint.port, config);
    process.stderr.write(
      `jvm-load-agent: ${result.classesRecorded} classes recorded` +
        (result.errorCount > 0 ? `, ${result.errorCount} internal errors swallowed` : "") +
        "\n",
    );
    return result.flushed ? 0 : 1;
  } catch (error) {
    process.stderr.write(`jvm-load-agent: ${String(error)}\n`);
    return 1;
  }
}

main(process.argv.slice(2)).then((code) => {
  process.exitCode = code;
});
