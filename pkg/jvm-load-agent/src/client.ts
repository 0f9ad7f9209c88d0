import { EventEmitter } from "node:events";
import * as net from "node:net";

import { Reader, Writer } from "./buffer.js";
import {
  CommandSet,
  DEFAULT_ID_SIZES,
  EventCommand,
  EventKind,
  EventRequestCommand,
  HANDSHAKE,
  HEADER_LENGTH,
  IdSizes,
  REPLY_FLAG,
  SuspendPolicy,
  VirtualMachineCommand,
} from "./protocol.js";

interface Pending {
  resolve: (data: Buffer) => void;
  reject: (error: Error) => void;
}

export interface ClassPrepareEvent {
  signature: string;
  threadId: bigint;
  typeId: bigint;
}

/**
 * Client side of the JVM debug-wire connection.
 *
 * Emits:
 *  - "classPrepare" (ClassPrepareEvent) for every class the VM prepares
 *  - "vmDeath" when the VM announces shutdown
 *  - "closed" once the socket is gone
 *  - "protocolError" (Error) for event payloads that could not be decoded
 */
export class JdwpClient extends EventEmitter {
  private socket: net.Socket | null = null;
  private received: Buffer = Buffer.alloc(0);
  private handshaken = false;
  private nextId = 1;
  private readonly pending = new Map<number, Pending>();
  private idSizesValue: IdSizes = DEFAULT_ID_SIZES;

  async connect(host: string, port: number, timeoutMs = 10_000): Promise<void> {
    const socket = net.createConnection({ host, port });
    this.socket = socket;
    socket.on("data", (data) => this.onData(data));
    socket.on("close", () => this.onClose());
    socket.on("error", (error) => this.onSocketError(error));

    await new Promise<void>((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error(`handshake timed out after ${timeoutMs}ms`)),
        timeoutMs,
      );
      socket.once("connect", () => socket.write(HANDSHAKE, "ascii"));
      this.once("handshake", () => {
        clearTimeout(timer);
        resolve();
      });
      socket.once("error", (error) => {
        clearTimeout(timer);
        reject(error);
      });
    });
  }

  get idSizes(): IdSizes {
    return this.idSizesValue;
  }

  /** Fetch and remember the VM's identifier sizes. */
  async readIdSizes(): Promise<IdSizes> {
    const reply = new Reader(
      await this.request(CommandSet.VirtualMachine, VirtualMachineCommand.IDSizes),
    );
    this.idSizesValue = {
      fieldId: reply.u32(),
      methodId: reply.u32(),
      objectId: reply.u32(),
      referenceTypeId: reply.u32(),
      frameId: reply.u32(),
    };
    return this.idSizesValue;
  }

  /** Subscribe to class-prepare events without suspending anything. */
  async requestClassPrepareEvents(): Promise<number> {
    const payload = new Writer()
      .u8(EventKind.CLASS_PREPARE)
      .u8(SuspendPolicy.NONE)
      .u32(0) // no modifiers: every class, every loader
      .build();
    const reply = new Reader(
      await this.request(CommandSet.EventRequest, EventRequestCommand.Set, payload),
    );
    return reply.u32();
  }

  /** Resume the VM; a no-op when it is not suspended. */
  async resume(): Promise<void> {
    await this.request(CommandSet.VirtualMachine, VirtualMachineCommand.Resume);
  }

  async dispose(): Promise<void> {
    await this.request(CommandSet.VirtualMachine, VirtualMachineCommand.Dispose);
  }

  close(): void {
    this.socket?.destroy();
  }

  request(commandSet: number, command: number, payload: Buffer = Buffer.alloc(0)): Promise<Buffer> {
    const socket = this.socket;
    if (socket === null || socket.destroyed) {
      return Promise.reject(new Error("connection is closed"));
    }
    const id = this.nextId++;
    const packet = Buffer.alloc(HEADER_LENGTH + payload.length);
    packet.writeUInt32BE(packet.length, 0);
    packet.writeUInt32BE(id, 4);
    packet.writeUInt8(0, 8);
    packet.writeUInt8(commandSet, 9);
    packet.writeUInt8(command, 10);
    payload.copy(packet, HEADER_LENGTH);
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      socket.write(packet);
    });
  }

  private onData(data: Buffer): void {
    this.received = this.received.length === 0 ? data : Buffer.concat([this.received, data]);
    if (!this.handshaken) {
      if (this.received.length < HANDSHAKE.length) {
        return;
      }
      const reply = this.received.subarray(0, HANDSHAKE.length).toString("ascii");
      this.received = this.received.subarray(HANDSHAKE.length);
      if (reply !== HANDSHAKE) {
        this.emit("protocolError", new Error(`unexpected handshake reply: ${reply}`));
        this.close();
        return;
      }
      this.handshaken = true;
      this.emit("handshake");
    }
    while (this.received.length >= 4) {
      const length = this.received.readUInt32BE(0);
      if (length < HEADER_LENGTH) {
        this.emit("protocolError", new Error(`invalid packet length ${length}`));
        this.close();
        return;
      }
      if (this.received.length < length) {
        return;
      }
      const packet = this.received.subarray(0, length);
      this.received = this.received.subarray(length);
      this.dispatch(packet);
    }
  }

  private dispatch(packet: Buffer): void {
    const id = packet.readUInt32BE(4);
    const flags = packet.readUInt8(8);
    if (flags & REPLY_FLAG) {
      const errorCode = packet.readUInt16BE(9);
      const waiter = this.pending.get(id);
      if (!waiter) {
        return; // stale reply
      }
      this.pending.delete(id);
      if (errorCode !== 0) {
        waiter.reject(new Error(`command failed with error code ${errorCode}`));
      } else {
        waiter.resolve(packet.subarray(HEADER_LENGTH));
      }
      return;
    }
    const commandSet = packet.readUInt8(9);
    const command = packet.readUInt8(10);
    if (commandSet === CommandSet.Event && command === EventCommand.Composite) {
      this.handleComposite(packet.subarray(HEADER_LENGTH));
    }
  }

  private handleComposite(payload: Buffer): void {
    try {
      const reader = new Reader(payload);
      reader.u8(); // suspend policy
      const count = reader.u32();
      for (let i = 0; i < count; i++) {
        const kind = reader.u8();
        switch (kind) {
          case EventKind.CLASS_PREPARE: {
            reader.u32(); // request id
            const threadId = reader.id(this.idSizesValue.objectId);
            reader.u8(); // reference type tag
            const typeId = reader.id(this.idSizesValue.referenceTypeId);
            const signature = reader.string();
            reader.u32(); // class status
            this.emit("classPrepare", { signature, threadId, typeId } satisfies ClassPrepareEvent);
            break;
          }
          case EventKind.VM_START: {
            reader.u32();
            reader.id(this.idSizesValue.objectId);
            break;
          }
          case EventKind.VM_DEATH: {
            reader.u32();
            this.emit("vmDeath");
            break;
          }
          default:
            // unknown kinds have unknown sizes: the rest of this packet is lost
            throw new Error(`unsupported event kind ${kind}`);
        }
      }
    } catch (error) {
      this.emit("protocolError", error instanceof Error ? error : new Error(String(error)));
    }
  }

  private onClose(): void {
    for (const waiter of this.pending.values()) {
      waiter.reject(new Error("connection closed"));
    }
    this.pending.clear();
    this.emit("closed");
  }

  private onSocketError(error: Error): void {
    if (this.pending.size === 0) {
      this.emit("protocolError", error);
    }
    // pending requests are rejected by the close handler that follows
  }
}
